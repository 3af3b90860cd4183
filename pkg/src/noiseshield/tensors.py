"""Core tensor types and the deterministic RNG contract.

Everything downstream works on two dense containers: a real-valued latent
tensor and a binary grid, both over (frames, channels, height, width).
Instances are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# 2**63 - 1: element counts must stay inside portable signed 64-bit range.
_MAX_ELEMENTS = (1 << 63) - 1


class TensorError(ValueError):
    """Raised when a tensor or shape violates its invariants."""


@dataclass(frozen=True)
class Shape4:
    """Dimensions (f, c, h, w) of a latent tensor or bit grid."""

    f: int
    c: int
    h: int
    w: int

    def __post_init__(self):
        for name in ("f", "c", "h", "w"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise TensorError(f"dimension {name}={v!r} must be a positive integer")
            object.__setattr__(self, name, int(v))
        if self.count > _MAX_ELEMENTS:
            raise TensorError(f"element count {self.count} overflows 64-bit range")

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (self.f, self.c, self.h, self.w)

    @property
    def count(self) -> int:
        return self.f * self.c * self.h * self.w


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LatentTensor:
    """Real-valued tensor in standard-Gaussian latent units, float64 in memory."""

    shape: Shape4
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64).reshape(self.shape.dims)
        if not np.all(np.isfinite(arr)):
            raise TensorError("latent tensor contains NaN or Inf")
        object.__setattr__(self, "data", _freeze(arr))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "LatentTensor":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 4:
            raise TensorError(f"expected 4-d array, got ndim={arr.ndim}")
        return cls(Shape4(*arr.shape), arr)


@dataclass(frozen=True)
class BitGrid4D:
    """Binary tensor over (f, c, h, w); every element is 0 or 1."""

    shape: Shape4
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.bits).reshape(self.shape.dims)
        if arr.dtype != np.uint8:
            arr = arr.astype(np.uint8)
        if arr.size and arr.max() > 1:
            raise TensorError("bit grid contains values outside {0, 1}")
        object.__setattr__(self, "bits", _freeze(arr))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "BitGrid4D":
        arr = np.asarray(arr)
        if arr.ndim != 4:
            raise TensorError(f"expected 4-d array, got ndim={arr.ndim}")
        return cls(Shape4(*arr.shape), arr)


_U64_MASK = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class SeededRng:
    """Deterministic, splittable RNG handle.

    Identical (seed, stream) pairs produce identical draw sequences across
    runs and platforms: the pair keys a counter-based Philox generator
    directly, so distinct streams are statistically independent.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.seed & _U64_MASK, self.stream & _U64_MASK], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))

    def with_stream(self, stream: int) -> "SeededRng":
        return SeededRng(self.seed, stream)
