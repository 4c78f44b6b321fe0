"""Single-case result file: header, cell-centered fields, convergence tag.

Layout (all little-endian): magic ``FLOWC1\\0``, six float64 case scalars
(left velocity, right velocity, supply temperature, glazing temperature,
surface heat, configuration code), two uint32 grid extents (nx, ny), four
float32 field blocks of ny*nx values in row-major floor-first order
(u, v, speed, temperature), one uint32 iteration count, one uint8
converged flag, one float64 final residual, and a trailing CRC32.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cases import CaseSpec
from .simple import FlowState

MAGIC = b"FLOWC1\x00"

_CODE_TO_CONFIG = {0: "left", 1: "right", 2: "dual"}


class CaseFileError(ValueError):
    """Malformed, truncated or corrupted case file."""


@dataclass(frozen=True)
class CaseResult:
    """Cell-centered fields of one solved case, as stored on disk."""

    spec: CaseSpec
    nx: int
    ny: int
    u: np.ndarray            # (ny, nx) float32
    v: np.ndarray
    magnitude: np.ndarray
    temperature: np.ndarray
    iterations: int
    converged: bool
    final_residual: float


def write_case(path: str | Path, spec: CaseSpec, state: FlowState) -> None:
    ny, nx = state.temperature.shape
    parts = [MAGIC]
    parts.append(
        struct.pack(
            "<6d",
            spec.left_velocity,
            spec.right_velocity,
            spec.inlet_temperature,
            spec.window_temperature,
            spec.surface_heat,
            float(spec.config_code),
        )
    )
    parts.append(struct.pack("<2I", nx, ny))
    for f in (state.u_center, state.v_center, state.magnitude, state.temperature):
        parts.append(np.ascontiguousarray(f, dtype="<f4").tobytes())
    parts.append(struct.pack("<IBd", state.iterations, int(state.converged), state.final_residual))
    blob = b"".join(parts)
    blob += struct.pack("<I", zlib.crc32(blob) & 0xFFFFFFFF)
    Path(path).write_bytes(blob)


def read_case(path: str | Path) -> CaseResult:
    blob = Path(path).read_bytes()
    if len(blob) < len(MAGIC) + 4 or not blob.startswith(MAGIC):
        raise CaseFileError(f"{path}: not a case file")
    (crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(blob[:-4]) & 0xFFFFFFFF != crc:
        raise CaseFileError(f"{path}: checksum mismatch")
    off = len(MAGIC)
    try:
        scalars = struct.unpack_from("<6d", blob, off)
        off += 48
        nx, ny = struct.unpack_from("<2I", blob, off)
        off += 8
        fields = []
        for _ in range(4):
            arr = np.frombuffer(blob, dtype="<f4", count=ny * nx, offset=off)
            fields.append(arr.reshape(ny, nx).copy())
            off += 4 * ny * nx
        iters, conv, resid = struct.unpack_from("<IBd", blob, off)
        off += struct.calcsize("<IBd")
    except (struct.error, ValueError) as exc:
        raise CaseFileError(f"{path}: truncated case file") from exc
    if off != len(blob) - 4:
        raise CaseFileError(f"{path}: trailing bytes in case file")
    code = int(scalars[5])
    if code not in _CODE_TO_CONFIG:
        raise CaseFileError(f"{path}: unknown configuration code {code}")
    spec = CaseSpec(
        left_velocity=scalars[0],
        right_velocity=scalars[1],
        inlet_temperature=scalars[2],
        window_temperature=scalars[3],
        surface_heat=scalars[4],
    )
    if spec.config_code != code:
        raise CaseFileError(f"{path}: configuration code disagrees with velocities")
    return CaseResult(
        spec=spec, nx=int(nx), ny=int(ny),
        u=fields[0], v=fields[1], magnitude=fields[2], temperature=fields[3],
        iterations=int(iters), converged=bool(conv), final_residual=float(resid),
    )
