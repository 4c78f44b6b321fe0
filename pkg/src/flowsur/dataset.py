"""Case matrices, field normalization and the packed dataset file.

The training matrix covers each inlet alone at five supply speeds plus the
full five-by-five grid of dual-inlet combinations; the held-out matrix is
six dual cases off the training lattice.  Fields are packed per case as a
``(2, ny, nx)`` float32 tensor, channel 0 the normalized speed magnitude,
channel 1 the normalized temperature, row 0 at the floor.
"""

from __future__ import annotations

import struct
import warnings
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .solver.cases import CaseSpec

TRAIN_SINGLE_VELOCITIES = (0.05, 0.25, 0.50, 0.70, 1.00)
TEST_DUAL_VELOCITIES = (
    (0.1, 0.9),
    (0.2, 0.8),
    (0.4, 0.6),
    (0.6, 0.4),
    (0.8, 0.2),
    (0.9, 0.1),
)

MAGIC = b"FLOWDS1\x00"

_SPLIT_CODES = {"train": 0, "test": 1}
_CODE_SPLITS = {v: k for k, v in _SPLIT_CODES.items()}


class DatasetError(ValueError):
    """Malformed, truncated or corrupted dataset file."""


def generate_case_matrix() -> tuple[list[CaseSpec], list[CaseSpec]]:
    """All boundary-condition scenarios: (35 training, 6 held-out)."""
    train: list[CaseSpec] = []
    for vel in TRAIN_SINGLE_VELOCITIES:
        train.append(CaseSpec(left_velocity=vel, right_velocity=0.0))
    for vel in TRAIN_SINGLE_VELOCITIES:
        train.append(CaseSpec(left_velocity=0.0, right_velocity=vel))
    for vl in TRAIN_SINGLE_VELOCITIES:
        for vr in TRAIN_SINGLE_VELOCITIES:
            train.append(CaseSpec(left_velocity=vl, right_velocity=vr))
    test = [CaseSpec(left_velocity=vl, right_velocity=vr) for vl, vr in TEST_DUAL_VELOCITIES]
    return train, test


@dataclass(frozen=True)
class NormalizationSpec:
    """Affine maps taking physical fields into [0, 1].

    Speed divides by ``velocity_scale``; temperature maps
    ``[temp_low, temp_high]`` onto [0, 1].  Values outside the range are
    clamped, with a warning when more than 0.1% of cells clip.
    """

    velocity_scale: float = 1.2
    temp_low: float = 10.0
    temp_high: float = 35.0

    def __post_init__(self):
        if self.velocity_scale <= 0 or self.temp_high <= self.temp_low:
            raise ValueError("degenerate normalization ranges")

    @property
    def temp_span(self) -> float:
        return self.temp_high - self.temp_low

    def normalize(self, magnitude: np.ndarray, temperature: np.ndarray) -> np.ndarray:
        if magnitude.shape != temperature.shape:
            raise ValueError("field shapes disagree")
        vel = magnitude / self.velocity_scale
        tmp = (temperature - self.temp_low) / self.temp_span
        out = np.stack([vel, tmp]).astype(np.float32)
        clipped = float(np.mean((out < 0.0) | (out > 1.0)))
        if clipped > 1e-3:
            warnings.warn(
                f"{clipped:.1%} of cells outside the normalization range were clamped",
                stacklevel=2,
            )
        return np.clip(out, 0.0, 1.0)

    def denormalize(self, fields: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Inverse map: (2, ny, nx) in [0,1] -> (speed m/s, temperature C)."""
        if fields.ndim != 3 or fields.shape[0] != 2:
            raise ValueError(f"expected (2, ny, nx), got {fields.shape}")
        return (
            fields[0] * self.velocity_scale,
            fields[1] * self.temp_span + self.temp_low,
        )


@dataclass(frozen=True)
class SampleRecord:
    """One case's normalized field tensor plus its scenario and split."""

    spec: CaseSpec
    fields: np.ndarray  # (2, ny, nx) float32 in [0, 1]
    split: str

    def __post_init__(self):
        if self.fields.ndim != 3 or self.fields.shape[0] != 2:
            raise ValueError(f"expected (2, ny, nx) fields, got {self.fields.shape}")
        if self.split not in _SPLIT_CODES:
            raise ValueError(f"unknown split {self.split!r}")


def to_sample(result, norm: NormalizationSpec, split: str) -> SampleRecord:
    """Pack a solved case (any object with .spec/.magnitude/.temperature)."""
    fields = norm.normalize(result.magnitude, result.temperature)
    return SampleRecord(spec=result.spec, fields=fields, split=split)


def write_dataset(path: str | Path, records: list[SampleRecord], norm: NormalizationSpec) -> None:
    parts = [MAGIC, struct.pack("<I", len(records))]
    parts.append(struct.pack("<3d", norm.velocity_scale, norm.temp_low, norm.temp_high))
    for rec in records:
        s = rec.spec
        parts.append(
            struct.pack(
                "<6d",
                s.left_velocity,
                s.right_velocity,
                s.inlet_temperature,
                s.window_temperature,
                s.surface_heat,
                float(s.config_code),
            )
        )
        parts.append(struct.pack("<B", _SPLIT_CODES[rec.split]))
        c, ny, nx = rec.fields.shape
        parts.append(struct.pack("<3I", c, ny, nx))
        parts.append(np.ascontiguousarray(rec.fields, dtype="<f4").tobytes())
    blob = b"".join(parts)
    blob += struct.pack("<I", zlib.crc32(blob) & 0xFFFFFFFF)
    Path(path).write_bytes(blob)


def read_dataset(path: str | Path) -> tuple[list[SampleRecord], NormalizationSpec]:
    blob = Path(path).read_bytes()
    if len(blob) < len(MAGIC) + 8 or not blob.startswith(MAGIC):
        raise DatasetError(f"{path}: not a dataset file")
    (crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(blob[:-4]) & 0xFFFFFFFF != crc:
        raise DatasetError(f"{path}: checksum mismatch")
    off = len(MAGIC)
    try:
        (count,) = struct.unpack_from("<I", blob, off)
        off += 4
        vs, tl, th = struct.unpack_from("<3d", blob, off)
        off += 24
        norm = NormalizationSpec(velocity_scale=vs, temp_low=tl, temp_high=th)
        records: list[SampleRecord] = []
        for _ in range(count):
            scalars = struct.unpack_from("<6d", blob, off)
            off += 48
            (split_code,) = struct.unpack_from("<B", blob, off)
            off += 1
            c, ny, nx = struct.unpack_from("<3I", blob, off)
            off += 12
            n = c * ny * nx
            fields = np.frombuffer(blob, dtype="<f4", count=n, offset=off).reshape(c, ny, nx)
            off += 4 * n
            spec = CaseSpec(
                left_velocity=scalars[0],
                right_velocity=scalars[1],
                inlet_temperature=scalars[2],
                window_temperature=scalars[3],
                surface_heat=scalars[4],
            )
            if spec.config_code != int(scalars[5]):
                raise DatasetError(f"{path}: configuration code disagrees with velocities")
            if split_code not in _CODE_SPLITS:
                raise DatasetError(f"{path}: unknown split code {split_code}")
            records.append(SampleRecord(spec=spec, fields=fields.copy(), split=_CODE_SPLITS[split_code]))
    except (struct.error, ValueError) as exc:
        raise DatasetError(f"{path}: truncated dataset file") from exc
    if off != len(blob) - 4:
        raise DatasetError(f"{path}: trailing bytes")
    return records, norm
