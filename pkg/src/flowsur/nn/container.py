"""Binary container for trained parameters.

Layout: the magic ``CBML1\\0``, then one record per named tensor, then a
CRC32 of everything before it.  Records are ``u32`` name length, UTF-8
name, ``u32`` rank, ``u32`` extents, and raw little-endian ``float32``
data in C order.  Insertion order is preserved on round trip.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

MAGIC = b"CBML1\x00"


class ContainerError(ValueError):
    """Malformed, truncated or corrupted container file."""


def write_container(path: str | Path, tensors: dict[str, np.ndarray]) -> None:
    parts = [MAGIC]
    for name, arr in tensors.items():
        a = np.asarray(arr, dtype="<f4")  # keeps rank-0 scalars rank 0
        enc = name.encode("utf-8")
        parts.append(struct.pack("<I", len(enc)))
        parts.append(enc)
        parts.append(struct.pack("<I", a.ndim))
        parts.append(struct.pack(f"<{a.ndim}I", *a.shape))
        parts.append(a.tobytes())
    blob = b"".join(parts)
    blob += struct.pack("<I", zlib.crc32(blob) & 0xFFFFFFFF)
    Path(path).write_bytes(blob)


def read_container(path: str | Path) -> dict[str, np.ndarray]:
    blob = Path(path).read_bytes()
    if len(blob) < len(MAGIC) + 4:
        raise ContainerError(f"{path}: file too short to be a parameter container")
    if not blob.startswith(MAGIC):
        raise ContainerError(f"{path}: bad magic {blob[:6]!r}")
    (stored_crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(blob[:-4]) & 0xFFFFFFFF != stored_crc:
        raise ContainerError(f"{path}: checksum mismatch, file is corrupted")

    tensors: dict[str, np.ndarray] = {}
    off, end = len(MAGIC), len(blob) - 4
    while off < end:
        try:
            (name_len,) = struct.unpack_from("<I", blob, off)
            off += 4
            name = blob[off : off + name_len].decode("utf-8")
            off += name_len
            (rank,) = struct.unpack_from("<I", blob, off)
            off += 4
            shape = struct.unpack_from(f"<{rank}I", blob, off)
            off += 4 * rank
            count = int(np.prod(shape, dtype=np.int64)) if rank else 1
            data = np.frombuffer(blob, dtype="<f4", count=count, offset=off)
            off += 4 * count
        except (struct.error, ValueError, UnicodeDecodeError) as exc:
            raise ContainerError(f"{path}: truncated or malformed record") from exc
        if off > end:
            raise ContainerError(f"{path}: record for {name!r} overruns the file")
        tensors[name] = data.reshape(shape).copy()
    return tensors


def file_checksum(path: str | Path) -> str:
    """Hex CRC32 of the whole file; cheap identity tag for serving."""
    return format(zlib.crc32(Path(path).read_bytes()) & 0xFFFFFFFF, "08x")
