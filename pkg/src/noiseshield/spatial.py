"""Spatial tamper localizer: channel averaging plus hierarchical refinement.

The agreement bits are averaged over channels into a soft mask, then
refined over L levels. Level l groups mu^3 = 8^(l-1) neighboring cells
(frames x rows x cols), averages each block, polarizes confidently
tampered/intact blocks to 0/1 while leaving ambiguous scores soft, and
re-expands to full size; the refined mask is the mean of the level masks.
A final threshold and nearest-neighbor upscale turn it into a binary
tamper mask (1 = tampered).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .formats import write_bits_file
from .tensors import BitGrid4D, Shape4


class SpatialError(ValueError):
    """Raised on invalid masks, levels, or thresholds."""


@dataclass(frozen=True)
class HstrConfig:
    """Refinement settings: L levels with per-level (t_wm, t_orig)
    thresholds, plus the final binarize threshold and spatial upscale."""

    levels: int
    thresholds: tuple[tuple[float, float], ...]
    tau: float = 0.5
    upscale: int = 1

    def __post_init__(self):
        if self.levels < 1:
            raise SpatialError("levels must be >= 1")
        if len(self.thresholds) != self.levels:
            raise SpatialError(
                f"{self.levels} levels need {self.levels} threshold pairs"
            )
        for t_wm, t_orig in self.thresholds:
            if not 0.0 <= t_wm <= t_orig <= 1.0:
                raise SpatialError(
                    f"thresholds must satisfy 0 <= t_wm <= t_orig <= 1, got "
                    f"({t_wm}, {t_orig})"
                )
        if not 0.0 < self.tau < 1.0:
            raise SpatialError(f"tau={self.tau} must lie in (0, 1)")
        if self.upscale < 1:
            raise SpatialError("upscale must be >= 1")
        object.__setattr__(
            self, "thresholds", tuple((float(a), float(b)) for a, b in self.thresholds)
        )

    def mu(self, level: int) -> int:
        return 2 ** (level - 1)


def _check_soft(m: np.ndarray, name: str = "mask") -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 3:
        raise SpatialError(f"{name} must have shape (frames, h, w)")
    return m


def channel_average(cmp_bits: BitGrid4D) -> np.ndarray:
    """Initial soft mask: mean of the agreement bits over the channel axis."""
    return cmp_bits.bits.mean(axis=1, dtype=np.float64)


def gather_average(m: np.ndarray, mu: int) -> np.ndarray:
    """Downsample by averaging disjoint mu x mu x mu blocks."""
    m = _check_soft(m)
    if mu < 1:
        raise SpatialError("mu must be >= 1")
    if mu == 1:
        return m.copy()
    f, h, w = m.shape
    if f % mu or h % mu or w % mu:
        raise SpatialError(f"mu={mu} does not divide mask dims {(f, h, w)}")
    return m.reshape(f // mu, mu, h // mu, mu, w // mu, mu).mean(axis=(1, 3, 5))


def partial_threshold_binarize(
    m: np.ndarray, t_wm: float, t_orig: float
) -> np.ndarray:
    """Polarize confident scores: below t_wm -> 0 (tampered), above t_orig
    -> 1 (intact); scores in between, or exactly at a threshold, pass
    through unchanged."""
    if t_wm > t_orig:
        raise SpatialError(f"t_wm={t_wm} must not exceed t_orig={t_orig}")
    m = np.asarray(m, dtype=np.float64)
    return np.where(m < t_wm, 0.0, np.where(m > t_orig, 1.0, m))


def repeat_expand(m: np.ndarray, mu: int) -> np.ndarray:
    """Inverse of the downsampling grid: every cell fills its mu^3 block."""
    m = _check_soft(m)
    if mu < 1:
        raise SpatialError("mu must be >= 1")
    if mu == 1:
        return m.copy()
    out = m
    for axis in range(3):
        out = np.repeat(out, mu, axis=axis)
    return out


def _pad_to_multiple(m: np.ndarray, mu: int) -> np.ndarray:
    pads = [(0, (-d) % mu) for d in m.shape]
    if any(p[1] for p in pads):
        return np.pad(m, pads, mode="edge")
    return m


def hstr(m_ini: np.ndarray, cfg: HstrConfig) -> np.ndarray:
    """Hierarchical refinement: average of the L per-level masks.

    Dims that the coarsest level does not divide are edge-padded first and
    cropped after re-expansion.
    """
    m_ini = _check_soft(m_ini, "m_ini")
    f, h, w = m_ini.shape
    padded = _pad_to_multiple(m_ini, cfg.mu(cfg.levels))
    acc = np.zeros_like(padded)
    for level in range(1, cfg.levels + 1):
        mu = cfg.mu(level)
        t_wm, t_orig = cfg.thresholds[level - 1]
        block = partial_threshold_binarize(gather_average(padded, mu), t_wm, t_orig)
        acc += repeat_expand(block, mu)
    return (acc / cfg.levels)[:f, :h, :w]


def finalize_mask(m_ref: np.ndarray, tau: float, s: int) -> np.ndarray:
    """Binary tamper mask at (f, h*s, w*s): nearest-neighbor upscale, then
    mark positions whose agreement falls below tau."""
    m_ref = _check_soft(m_ref, "refined mask")
    if not 0.0 < tau < 1.0:
        raise SpatialError(f"tau={tau} must lie in (0, 1)")
    if s < 1:
        raise SpatialError("upscale factor must be >= 1")
    up = m_ref
    if s > 1:
        up = np.repeat(np.repeat(up, s, axis=1), s, axis=2)
    return (up < tau).astype(np.uint8)


def write_mask_file(mask: np.ndarray, path) -> None:
    """Export a binary (f, H, W) tamper mask as a bit-grid file (f, 1, H, W)."""
    mask = np.asarray(mask, dtype=np.uint8)
    if mask.ndim != 3:
        raise SpatialError("mask must have shape (frames, H, W)")
    f, hh, ww = mask.shape
    write_bits_file(BitGrid4D(Shape4(f, 1, hh, ww), mask[:, None]), path)
