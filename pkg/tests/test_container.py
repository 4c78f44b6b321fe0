"""Round-trip and corruption behaviour of the binary parameter container."""

import struct
import zlib

import numpy as np
import pytest

from flowsur.nn import ContainerError, file_checksum, read_container, write_container


def test_round_trip_preserves_values_shapes_and_order(tmp_path, rng):
    tensors = {
        "enc.s1.conv.w": rng.standard_normal((16, 2, 3, 3)).astype(np.float32),
        "enc.s1.conv.b": np.zeros(16, dtype=np.float32),
        "mlp.fc0.w": rng.standard_normal((128, 2)).astype(np.float32),
        "norm.velocity_scale": np.array(1.2, dtype=np.float32),
    }
    path = tmp_path / "m.cbml"
    write_container(path, tensors)
    back = read_container(path)
    assert list(back) == list(tensors)
    for k in tensors:
        assert back[k].shape == tensors[k].shape
        assert np.array_equal(back[k], tensors[k])


def test_float64_inputs_are_stored_as_float32(tmp_path):
    write_container(tmp_path / "m.cbml", {"a": np.array([1.0, 2.0], dtype=np.float64)})
    back = read_container(tmp_path / "m.cbml")
    assert back["a"].dtype == np.float32


def test_magic_is_checked(tmp_path):
    p = tmp_path / "bad.cbml"
    p.write_bytes(b"NOPE12" + b"\x00" * 16)
    with pytest.raises(ContainerError, match="magic"):
        read_container(p)


def test_crc_detects_flipped_bit(tmp_path, rng):
    p = tmp_path / "m.cbml"
    write_container(p, {"w": rng.standard_normal((4, 4)).astype(np.float32)})
    blob = bytearray(p.read_bytes())
    blob[20] ^= 0x01
    p.write_bytes(bytes(blob))
    with pytest.raises(ContainerError, match="checksum"):
        read_container(p)


def test_truncated_file_rejected(tmp_path, rng):
    p = tmp_path / "m.cbml"
    write_container(p, {"w": rng.standard_normal((8,)).astype(np.float32)})
    blob = p.read_bytes()
    p.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(ContainerError):
        read_container(p)
    p.write_bytes(blob[:6])
    with pytest.raises(ContainerError):
        read_container(p)


def test_layout_is_exactly_as_documented(tmp_path):
    arr = np.arange(6, dtype=np.float32).reshape(2, 3)
    p = tmp_path / "m.cbml"
    write_container(p, {"ab": arr})
    blob = p.read_bytes()
    expect = b"CBML1\x00"
    expect += struct.pack("<I", 2) + b"ab"
    expect += struct.pack("<I", 2) + struct.pack("<2I", 2, 3)
    expect += arr.astype("<f4").tobytes()
    expect += struct.pack("<I", zlib.crc32(expect) & 0xFFFFFFFF)
    assert blob == expect


def test_file_checksum_is_stable_hex(tmp_path):
    p = tmp_path / "m.cbml"
    write_container(p, {"a": np.ones(3, dtype=np.float32)})
    c1 = file_checksum(p)
    c2 = file_checksum(p)
    assert c1 == c2 and len(c1) == 8
    int(c1, 16)  # must be hex
