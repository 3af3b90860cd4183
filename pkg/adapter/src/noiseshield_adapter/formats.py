"""Independent implementation of the core's tensor wire formats.

The adapter deliberately does not import the core package; these readers and
writers are re-derived from the published layout so the two sides only share
bytes. Layout (little-endian): 4-byte magic ("VSLT" latents / "VSBT" bits),
u32 version (1), four u32 dims (f, c, h, w), then f32 data row-major or bits
packed MSB-first with a zero-padded final byte.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

LATENT_MAGIC = b"VSLT"
BITS_MAGIC = b"VSBT"
VERSION = 1

_HEADER = struct.Struct("<4sIIIII")


class AdapterFormatError(ValueError):
    pass


def _check_header(raw: bytes, magic: bytes, path) -> tuple[tuple[int, int, int, int], bytes]:
    if len(raw) < _HEADER.size:
        raise AdapterFormatError(f"{path}: truncated header")
    got, version, f, c, h, w = _HEADER.unpack_from(raw)
    if got != magic:
        raise AdapterFormatError(f"{path}: bad magic {got!r}")
    if version != VERSION:
        raise AdapterFormatError(f"{path}: unsupported version {version}")
    if min(f, c, h, w) < 1:
        raise AdapterFormatError(f"{path}: invalid dims {(f, c, h, w)}")
    return (f, c, h, w), raw[_HEADER.size :]


def write_latent(path, data: np.ndarray) -> None:
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 4:
        raise AdapterFormatError("latent must be 4-d (f, c, h, w)")
    header = _HEADER.pack(LATENT_MAGIC, VERSION, *data.shape)
    Path(path).write_bytes(header + data.astype("<f4").tobytes())


def read_latent(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    dims, payload = _check_header(raw, LATENT_MAGIC, path)
    count = int(np.prod(dims))
    if len(payload) != count * 4:
        raise AdapterFormatError(f"{path}: expected {count * 4} payload bytes")
    return np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(dims)


def write_bits(path, bits: np.ndarray) -> None:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 4:
        raise AdapterFormatError("bit grid must be 4-d (f, c, h, w)")
    if bits.size and bits.max() > 1:
        raise AdapterFormatError("bit grid values must be 0 or 1")
    header = _HEADER.pack(BITS_MAGIC, VERSION, *bits.shape)
    Path(path).write_bytes(header + np.packbits(bits.reshape(-1)).tobytes())


def read_bits(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    dims, payload = _check_header(raw, BITS_MAGIC, path)
    count = int(np.prod(dims))
    if len(payload) != (count + 7) // 8:
        raise AdapterFormatError(f"{path}: wrong payload size")
    unpacked = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))
    if unpacked[count:].any():
        raise AdapterFormatError(f"{path}: nonzero padding")
    return unpacked[:count].reshape(dims)
