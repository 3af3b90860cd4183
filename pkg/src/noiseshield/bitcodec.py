"""Payload replication, stream-cipher templating, and majority-vote decoding.

A payload of n bits is block-replicated into a full-size grid (each bit
occupying exactly k_all = k_f*k_c*k_h*k_w slots), then whitened with a
ChaCha20 keystream into template bits. Extraction XORs the recovered grid
with the same keystream and takes a per-bit majority vote over the k_all
replica slots; an exact tie decodes to 0.
"""

from __future__ import annotations

import json
import secrets
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import chacha
from .tensors import BitGrid4D, SeededRng, Shape4

KEY_BYTES = 32
NONCE_BYTES = 12


class CodecError(ValueError):
    """Raised on shape/factor mismatches or malformed keys."""


@dataclass(frozen=True)
class RepeatFactors:
    """Per-dimension replication factors (k_f, k_c, k_h, k_w)."""

    k_f: int
    k_c: int
    k_h: int
    k_w: int

    def __post_init__(self):
        for name, v in zip(("k_f", "k_c", "k_h", "k_w"), self.dims):
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise CodecError(f"{name}={v!r} must be a positive integer")

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (self.k_f, self.k_c, self.k_h, self.k_w)

    @property
    def k_all(self) -> int:
        return self.k_f * self.k_c * self.k_h * self.k_w

    def check_divides(self, shape: Shape4) -> None:
        for name, dim, k in zip("fchw", shape.dims, self.dims):
            if dim % k:
                raise CodecError(f"factor {k} does not divide {name}={dim}")

    def payload_shape(self, shape: Shape4) -> tuple[int, int, int, int]:
        self.check_divides(shape)
        return tuple(d // k for d, k in zip(shape.dims, self.dims))

    def n_bits(self, shape: Shape4) -> int:
        return int(np.prod(self.payload_shape(shape)))


@dataclass(frozen=True)
class WatermarkPayload:
    """Flat array of watermark bits, row-major over the reduced grid."""

    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.bits, dtype=np.uint8).reshape(-1)
        if arr.size == 0:
            raise CodecError("payload must contain at least one bit")
        if arr.max() > 1:
            raise CodecError("payload bits must be 0 or 1")
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    @property
    def n_bits(self) -> int:
        return self.bits.size

    def __eq__(self, other) -> bool:
        return isinstance(other, WatermarkPayload) and np.array_equal(
            self.bits, other.bits
        )


def random_payload(n_bits: int, rng: SeededRng) -> WatermarkPayload:
    gen = rng.generator()
    return WatermarkPayload(gen.integers(0, 2, size=n_bits, dtype=np.uint8))


@dataclass(frozen=True)
class WatermarkKey:
    """256-bit cipher key plus 96-bit nonce identifying a watermark owner."""

    key: bytes
    nonce: bytes

    def __post_init__(self):
        if len(self.key) != KEY_BYTES:
            raise CodecError(f"key must be {KEY_BYTES} bytes, got {len(self.key)}")
        if len(self.nonce) != NONCE_BYTES:
            raise CodecError(
                f"nonce must be {NONCE_BYTES} bytes, got {len(self.nonce)}"
            )

    @classmethod
    def generate(cls) -> "WatermarkKey":
        return cls(secrets.token_bytes(KEY_BYTES), secrets.token_bytes(NONCE_BYTES))

    def to_json(self) -> str:
        return json.dumps({"key": self.key.hex(), "nonce": self.nonce.hex()})

    @classmethod
    def from_json(cls, text: str) -> "WatermarkKey":
        try:
            obj = json.loads(text)
            return cls(bytes.fromhex(obj["key"]), bytes.fromhex(obj["nonce"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise CodecError(f"malformed key JSON: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "WatermarkKey":
        return cls.from_json(Path(path).read_text())


def expand_payload(
    m: WatermarkPayload, shape: Shape4, factors: RepeatFactors
) -> BitGrid4D:
    """Block-replicate the payload so slot (q,i,j,k) holds bit
    m[q//k_f, i//k_c, j//k_h, k//k_w]."""
    reduced = factors.payload_shape(shape)
    if m.n_bits != int(np.prod(reduced)):
        raise CodecError(
            f"payload has {m.n_bits} bits, shape/factors require {int(np.prod(reduced))}"
        )
    grid = m.bits.reshape(reduced)
    for axis, k in enumerate(factors.dims):
        if k > 1:
            grid = np.repeat(grid, k, axis=axis)
    return BitGrid4D(shape, grid)


def _xor_keystream(bits: BitGrid4D, key: WatermarkKey) -> BitGrid4D:
    flat = bits.bits.reshape(-1)
    packed = np.packbits(flat)  # MSB-first, row-major
    mixed = chacha.xor_bytes(packed.tobytes(), key.key, key.nonce, counter=0)
    out = np.unpackbits(np.frombuffer(mixed, dtype=np.uint8))[: flat.size]
    return BitGrid4D(bits.shape, out.reshape(bits.shape.dims))


def encrypt_template(m_d: BitGrid4D, key: WatermarkKey) -> BitGrid4D:
    """Whiten the replicated payload into pseudo-random template bits."""
    return _xor_keystream(m_d, key)


def decrypt_template(iv: BitGrid4D, key: WatermarkKey) -> BitGrid4D:
    """Exact inverse of encrypt_template (same keystream XOR)."""
    return _xor_keystream(iv, key)


def majority_extract(m_d_ext: BitGrid4D, factors: RepeatFactors) -> WatermarkPayload:
    """Decode each payload bit as 1 iff more than half of its k_all replica
    slots are 1 (ties decode to 0)."""
    shape = m_d_ext.shape
    rf, rc, rh, rw = factors.payload_shape(shape)
    kf, kc, kh, kw = factors.dims
    counts = (
        m_d_ext.bits.reshape(rf, kf, rc, kc, rh, kh, rw, kw)
        .sum(axis=(1, 3, 5, 7), dtype=np.int64)
        .reshape(-1)
    )
    return WatermarkPayload((2 * counts > factors.k_all).astype(np.uint8))


def bit_accuracy(a: WatermarkPayload, b: WatermarkPayload) -> float:
    """Fraction of positions where the two payloads agree."""
    if a.n_bits != b.n_bits:
        raise CodecError(f"payload lengths differ: {a.n_bits} vs {b.n_bits}")
    return float(np.mean(a.bits == b.bits))
