"""HTTP prediction service around a trained model bundle.

Endpoints: GET /api/health, GET /api/meta, POST /api/predict, plus
optional static file serving for the companion UI.  Field payloads
travel as base64-encoded raw little-endian float32, row-major with the
floor row first, which round-trips bit-exactly and far smaller than a
JSON number array.

Malformed JSON bodies answer 400 with a message naming the problem;
well-formed requests that fail validation (out-of-range velocity, empty
field list) answer 422.
"""

from __future__ import annotations

import base64
import json
import logging
import os
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field, field_validator

from .models import ModelBundle, model_checksum
from .solver.cases import VELOCITY_RANGE

log = logging.getLogger("flowsur.service")

FIELD_UNITS = {"velocity": "m/s", "temperature": "degC"}


class PredictRequest(BaseModel):
    left_velocity: float = Field(ge=VELOCITY_RANGE[0], le=VELOCITY_RANGE[1])
    right_velocity: float = Field(ge=VELOCITY_RANGE[0], le=VELOCITY_RANGE[1])
    fields: list[str] = Field(default=["velocity", "temperature"], min_length=1)

    @field_validator("fields")
    @classmethod
    def _known_fields(cls, v):
        unknown = [f for f in v if f not in FIELD_UNITS]
        if unknown:
            raise ValueError(f"unknown fields {unknown}; expected subset of "
                             f"{sorted(FIELD_UNITS)}")
        return v


def _encode_field(values: np.ndarray) -> dict:
    raw = np.ascontiguousarray(values, dtype="<f4")
    return {
        "min": float(raw.min()),
        "max": float(raw.max()),
        "data": base64.b64encode(raw.tobytes()).decode("ascii"),
    }


def create_app(
    bundle: ModelBundle,
    checksum: str = "",
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service around one immutable bundle.

    Inference never mutates the bundle, so concurrent identical requests
    produce byte-identical payloads.
    """
    app = FastAPI(title="flowsur prediction service")
    ny, nx = bundle.grid_shape

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        errors = exc.errors()
        malformed = [e for e in errors if e.get("type", "").startswith("json")]
        if malformed:
            return JSONResponse(
                status_code=400,
                content={"detail": [
                    {"field": "body", "message": e.get("msg", "invalid JSON")}
                    for e in malformed
                ]},
            )
        return JSONResponse(
            status_code=422,
            content={"detail": [
                {
                    "field": ".".join(str(p) for p in e.get("loc", ()) if p != "body"),
                    "message": e.get("msg", "invalid value"),
                }
                for e in errors
            ]},
        )

    @app.middleware("http")
    async def _log_requests(request: Request, call_next):
        t0 = time.perf_counter()
        try:
            response = await call_next(request)
        except Exception:
            log.exception("request failed: %s %s", request.method, request.url.path)
            return JSONResponse(status_code=500,
                                content={"detail": "internal error"})
        log.info(
            "%s %s -> %d in %.1f ms",
            request.method,
            request.url.path,
            response.status_code,
            (time.perf_counter() - t0) * 1e3,
        )
        return response

    @app.get("/api/health")
    async def health():
        return {"status": "ok"}

    @app.get("/api/meta")
    async def meta():
        return {
            "grid": {"ny": ny, "nx": nx},
            "velocity_range": list(VELOCITY_RANGE),
            "model_checksum": checksum,
        }

    @app.post("/api/predict")
    async def predict(req: PredictRequest):
        speed, temperature, elapsed_ms = bundle.predict_dual(
            req.left_velocity, req.right_velocity
        )
        by_name = {"velocity": speed, "temperature": temperature}
        fields = {
            name: {"units": FIELD_UNITS[name], **_encode_field(by_name[name])}
            for name in dict.fromkeys(req.fields)
        }
        return {
            "grid": {"ny": ny, "nx": nx},
            "fields": fields,
            "latency_ms": elapsed_ms,
        }

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app


def load_app(model_path: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    path = Path(model_path)
    bundle = ModelBundle.load(path)
    return create_app(bundle, checksum=model_checksum(path), static_dir=static_dir)


def resolve_settings(
    port: int | None = None,
    model: str | None = None,
    static: str | None = None,
    config_file: str | Path | None = None,
    env: dict | None = None,
) -> dict:
    """Merge service settings: flags beat environment beats config file."""
    env = os.environ if env is None else env
    merged = {"port": 8000, "model": None, "static": None}
    if config_file is not None and Path(config_file).exists():
        with open(config_file) as fh:
            loaded = json.load(fh)
        for key in merged:
            if key in loaded:
                merged[key] = loaded[key]
    if "FLOWSUR_PORT" in env:
        merged["port"] = int(env["FLOWSUR_PORT"])
    if "FLOWSUR_MODEL" in env:
        merged["model"] = env["FLOWSUR_MODEL"]
    if "FLOWSUR_STATIC" in env:
        merged["static"] = env["FLOWSUR_STATIC"]
    for key, value in (("port", port), ("model", model), ("static", static)):
        if value is not None:
            merged[key] = value
    merged["port"] = int(merged["port"])
    return merged


def serve(model_path: str | Path, port: int = 8000,
          static_dir: str | Path | None = None) -> None:
    """Run the service until interrupted."""
    import uvicorn

    logging.basicConfig(level=logging.INFO)
    app = load_app(model_path, static_dir)
    uvicorn.run(app, host="0.0.0.0", port=port, log_level="info")
