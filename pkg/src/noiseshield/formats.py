"""Binary file formats for latent tensors ("VSLT") and bit grids ("VSBT").

Layout, all little-endian:

    magic     4 bytes   b"VSLT" or b"VSBT"
    version   u32       currently 1
    f,c,h,w   4 x u32
    payload   latents: count x f32, row-major (f, c, h, w)
              bits:    packed 8 per byte, MSB first, row-major,
                       final byte zero-padded

These two formats are the sole wire contract with external pipeline
adapters, so writes are bit-reproducible: rewriting the same tensor
yields a byte-identical file.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .tensors import BitGrid4D, LatentTensor, Shape4

LATENT_MAGIC = b"VSLT"
BITS_MAGIC = b"VSBT"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sIIIII")

_F32_MAX = np.float64(np.finfo(np.float32).max)


class FormatError(ValueError):
    """Raised for malformed or unreadable tensor files."""


def _write_header(magic: bytes, shape: Shape4) -> bytes:
    return _HEADER.pack(magic, FORMAT_VERSION, shape.f, shape.c, shape.h, shape.w)


def _read_header(raw: bytes, path, magic: bytes) -> tuple[Shape4, bytes]:
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: file shorter than header")
    got_magic, version, f, c, h, w = _HEADER.unpack_from(raw)
    if got_magic != magic:
        raise FormatError(f"{path}: bad magic {got_magic!r}, expected {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    try:
        shape = Shape4(f, c, h, w)
    except ValueError as exc:
        raise FormatError(f"{path}: invalid dimensions: {exc}") from exc
    return shape, raw[_HEADER.size :]


def write_latent_file(t: LatentTensor, path) -> None:
    if np.any(np.abs(t.data) > _F32_MAX):
        raise FormatError("latent value out of 32-bit float range")
    data32 = t.data.astype("<f4")
    Path(path).write_bytes(_write_header(LATENT_MAGIC, t.shape) + data32.tobytes())


def read_latent_file(path) -> LatentTensor:
    raw = Path(path).read_bytes()
    shape, payload = _read_header(raw, path, LATENT_MAGIC)
    expected = shape.count * 4
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    data = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    return LatentTensor(shape, data.reshape(shape.dims))


def write_bits_file(b: BitGrid4D, path) -> None:
    packed = np.packbits(b.bits.reshape(-1))
    Path(path).write_bytes(_write_header(BITS_MAGIC, b.shape) + packed.tobytes())


def read_bits_file(path) -> BitGrid4D:
    raw = Path(path).read_bytes()
    shape, payload = _read_header(raw, path, BITS_MAGIC)
    expected = (shape.count + 7) // 8
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    unpacked = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))
    if unpacked[shape.count :].any():
        raise FormatError(f"{path}: nonzero padding bits in final byte")
    return BitGrid4D(shape, unpacked[: shape.count].reshape(shape.dims))


def write_pgm(path, gray: np.ndarray) -> None:
    """Write a 2-d uint8 array as a binary portable graymap (P5)."""
    gray = np.asarray(gray, dtype=np.uint8)
    if gray.ndim != 2:
        raise FormatError("PGM export expects a 2-d array")
    h, w = gray.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode() + gray.tobytes())
