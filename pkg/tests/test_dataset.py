"""Case matrix enumeration, normalization maps and dataset file round-trips."""

import numpy as np
import pytest

from flowsur.dataset import (
    DatasetError,
    NormalizationSpec,
    SampleRecord,
    generate_case_matrix,
    read_dataset,
    to_sample,
    write_dataset,
)
from flowsur.solver import CaseSpec


class TestCaseMatrix:
    def test_split_sizes(self):
        train, test = generate_case_matrix()
        assert len(train) == 35
        assert len(test) == 6

    def test_train_composition(self):
        train, _ = generate_case_matrix()
        left_only = [s for s in train if s.config == "left"]
        right_only = [s for s in train if s.config == "right"]
        dual = [s for s in train if s.config == "dual"]
        assert len(left_only) == 5
        assert len(right_only) == 5
        assert len(dual) == 25
        # dual block is the full grid over the five supply speeds
        speeds = sorted({s.left_velocity for s in dual})
        assert speeds == [0.05, 0.25, 0.50, 0.70, 1.00]
        assert len({(s.left_velocity, s.right_velocity) for s in dual}) == 25

    def test_no_scenario_repeats_across_splits(self):
        train, test = generate_case_matrix()
        train_keys = {(s.left_velocity, s.right_velocity) for s in train}
        test_keys = {(s.left_velocity, s.right_velocity) for s in test}
        assert not train_keys & test_keys
        assert all(s.config == "dual" for s in test)

    def test_all_specs_valid(self):
        train, test = generate_case_matrix()
        for s in train + test:
            assert s.inlet_temperature == 10.0
            assert s.window_temperature == 35.0


class TestNormalization:
    def test_velocity_scaling(self):
        norm = NormalizationSpec()
        mag = np.full((3, 4), 0.6)
        tmp = np.full((3, 4), 22.5)
        fields = norm.normalize(mag, tmp)
        assert fields.shape == (2, 3, 4)
        assert fields.dtype == np.float32
        assert np.allclose(fields[0], 0.5)
        assert np.allclose(fields[1], 0.5)

    def test_round_trip(self, rng):
        norm = NormalizationSpec()
        mag = rng.uniform(0, 1.2, (10, 15))
        tmp = rng.uniform(10, 35, (10, 15))
        fields = norm.normalize(mag, tmp)
        mag2, tmp2 = norm.denormalize(fields)
        assert np.allclose(mag2, mag, atol=1e-6)
        assert np.allclose(tmp2, tmp, atol=1e-5)

    def test_clamps_out_of_range(self):
        norm = NormalizationSpec()
        mag = np.array([[1.5]])
        tmp = np.array([[40.0]])
        with pytest.warns(UserWarning, match="clamped"):
            fields = norm.normalize(mag, tmp)
        assert fields[0, 0, 0] == 1.0
        assert fields[1, 0, 0] == 1.0

    def test_no_warning_below_threshold(self):
        # a single clipped cell out of 10000 stays under the 0.1% threshold
        norm = NormalizationSpec()
        mag = np.zeros((100, 100))
        tmp = np.full((100, 100), 22.5)
        tmp[0, 0] = 9.0
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            fields = norm.normalize(mag, tmp)
        assert fields[1, 0, 0] == 0.0

    def test_degenerate_ranges_rejected(self):
        with pytest.raises(ValueError):
            NormalizationSpec(velocity_scale=0.0)
        with pytest.raises(ValueError):
            NormalizationSpec(temp_low=30.0, temp_high=20.0)

    def test_shape_mismatch_rejected(self):
        norm = NormalizationSpec()
        with pytest.raises(ValueError, match="disagree"):
            norm.normalize(np.zeros((2, 3)), np.zeros((3, 2)))


class _FakeResult:
    def __init__(self, spec, ny=6, nx=9):
        self.spec = spec
        rng = np.random.default_rng(7)
        self.magnitude = rng.uniform(0, 1.2, (ny, nx))
        self.temperature = rng.uniform(10, 35, (ny, nx))


class TestDatasetFile:
    def _records(self):
        norm = NormalizationSpec()
        specs = [
            CaseSpec(left_velocity=0.5, right_velocity=0.0),
            CaseSpec(left_velocity=0.25, right_velocity=1.0),
        ]
        recs = [to_sample(_FakeResult(s), norm, split) for s, split in zip(specs, ["train", "test"])]
        return recs, norm

    def test_round_trip(self, tmp_path):
        recs, norm = self._records()
        path = tmp_path / "data.flowds"
        write_dataset(path, recs, norm)
        got, norm2 = read_dataset(path)
        assert norm2 == norm
        assert len(got) == 2
        for a, b in zip(got, recs):
            assert a.spec == b.spec
            assert a.split == b.split
            assert np.array_equal(a.fields, b.fields)

    def test_checksum_guard(self, tmp_path):
        recs, norm = self._records()
        path = tmp_path / "data.flowds"
        write_dataset(path, recs, norm)
        blob = bytearray(path.read_bytes())
        blob[40] ^= 0x01
        path.write_bytes(bytes(blob))
        with pytest.raises(DatasetError, match="checksum"):
            read_dataset(path)

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "data.flowds"
        path.write_bytes(b"GARBAGE\x00" + b"\x00" * 32)
        with pytest.raises(DatasetError, match="not a dataset"):
            read_dataset(path)

    def test_sample_record_validation(self):
        spec = CaseSpec(left_velocity=0.5, right_velocity=0.0)
        with pytest.raises(ValueError, match="split"):
            SampleRecord(spec=spec, fields=np.zeros((2, 3, 4), np.float32), split="dev")
        with pytest.raises(ValueError, match="fields"):
            SampleRecord(spec=spec, fields=np.zeros((3, 4), np.float32), split="train")
