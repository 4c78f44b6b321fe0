"""HTTP service contract: payload shapes, status codes, determinism."""

import base64
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from flowsur.models import ModelBundle
from flowsur.service import create_app, resolve_settings


@pytest.fixture(scope="module")
def bundle():
    return ModelBundle.random(seed=11)


@pytest.fixture(scope="module")
def client(bundle):
    return TestClient(create_app(bundle, checksum="cafe1234"))


def decode_field(payload: dict) -> np.ndarray:
    return np.frombuffer(base64.b64decode(payload["data"]), dtype="<f4")


class TestMetaAndHealth:
    def test_health(self, client):
        r = client.get("/api/health")
        assert r.status_code == 200 and r.json() == {"status": "ok"}

    def test_meta_reports_grid_range_checksum(self, client):
        meta = client.get("/api/meta").json()
        assert meta["grid"] == {"ny": 100, "nx": 150}
        assert meta["velocity_range"] == [0.05, 1.0]
        assert meta["model_checksum"] == "cafe1234"


class TestPredict:
    def test_both_fields_round_trip(self, client):
        r = client.post("/api/predict", json={
            "left_velocity": 0.5, "right_velocity": 0.5,
            "fields": ["velocity", "temperature"],
        })
        assert r.status_code == 200
        body = r.json()
        assert body["grid"] == {"ny": 100, "nx": 150}
        assert body["latency_ms"] > 0
        for name, units in [("velocity", "m/s"), ("temperature", "degC")]:
            field = body["fields"][name]
            values = decode_field(field)
            assert values.size == 100 * 150
            assert field["units"] == units
            assert field["min"] == pytest.approx(float(values.min()))
            assert field["max"] == pytest.approx(float(values.max()))

    def test_fields_default_to_both(self, client):
        r = client.post("/api/predict",
                        json={"left_velocity": 0.3, "right_velocity": 0.7})
        assert set(r.json()["fields"]) == {"velocity", "temperature"}

    def test_single_field_request(self, client):
        r = client.post("/api/predict", json={
            "left_velocity": 0.3, "right_velocity": 0.7, "fields": ["velocity"],
        })
        assert list(r.json()["fields"]) == ["velocity"]

    def test_identical_requests_identical_payload(self, client):
        req = {"left_velocity": 0.42, "right_velocity": 0.58}
        a = client.post("/api/predict", json=req).json()["fields"]
        b = client.post("/api/predict", json=req).json()["fields"]
        assert a == b

    def test_out_of_range_velocity_is_422(self, client):
        for left in (2.0, 0.01, -0.5):
            r = client.post("/api/predict",
                            json={"left_velocity": left, "right_velocity": 0.5})
            assert r.status_code == 422
            assert any("left_velocity" in d["field"] for d in r.json()["detail"])

    def test_empty_or_unknown_fields_are_422(self, client):
        base = {"left_velocity": 0.5, "right_velocity": 0.5}
        assert client.post("/api/predict",
                           json={**base, "fields": []}).status_code == 422
        r = client.post("/api/predict", json={**base, "fields": ["pressure"]})
        assert r.status_code == 422

    def test_missing_velocity_is_422(self, client):
        r = client.post("/api/predict", json={"left_velocity": 0.5})
        assert r.status_code == 422

    def test_malformed_json_is_400(self, client):
        r = client.post("/api/predict", content=b"{broken",
                        headers={"Content-Type": "application/json"})
        assert r.status_code == 400
        assert r.json()["detail"][0]["field"] == "body"


class TestStatic:
    def test_static_dir_served_with_api_intact(self, bundle, tmp_path):
        (tmp_path / "index.html").write_text("<h1>panel</h1>")
        c = TestClient(create_app(bundle, static_dir=tmp_path))
        assert c.get("/api/health").status_code == 200
        page = c.get("/")
        assert page.status_code == 200 and "panel" in page.text


class TestSettings:
    def test_defaults(self):
        s = resolve_settings(env={})
        assert s == {"port": 8000, "model": None, "static": None}

    def test_precedence_flags_env_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(
            {"port": 1111, "model": "file.cbml", "static": "filedir"}))
        env = {"FLOWSUR_PORT": "2222", "FLOWSUR_MODEL": "env.cbml"}
        s = resolve_settings(config_file=cfg, env=env)
        assert s == {"port": 2222, "model": "env.cbml", "static": "filedir"}
        s = resolve_settings(port=3333, config_file=cfg, env=env)
        assert s["port"] == 3333 and s["model"] == "env.cbml"

    def test_missing_config_file_ignored(self, tmp_path):
        s = resolve_settings(config_file=tmp_path / "nope.json", env={})
        assert s["port"] == 8000
