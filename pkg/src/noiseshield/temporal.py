"""Frame-matching temporal localizer.

Every frame of the (possibly reordered) inverted bits is scored against
every original template frame by per-bit agreement. The best match recovers
each frame's original position; matches that score at or below t_temp are
flagged -1 (frame not part of the original video). The per-position
agreement bits against the winning frame feed the spatial stage.
"""

from __future__ import annotations

import numpy as np

from .tensors import BitGrid4D, Shape4


class TemporalError(ValueError):
    """Raised on mismatched grids or invalid thresholds."""


def score_matrix(iv: BitGrid4D, tp: BitGrid4D) -> np.ndarray:
    """Agreement fractions S[p, q] between tampered frame p and template
    frame q, averaged over (c, h, w)."""
    if iv.shape.dims[1:] != tp.shape.dims[1:]:
        raise TemporalError(
            f"per-frame dims differ: {iv.shape.dims[1:]} vs {tp.shape.dims[1:]}"
        )
    n = iv.shape.c * iv.shape.h * iv.shape.w
    x = iv.bits.reshape(iv.shape.f, n).astype(np.float64)
    y = tp.bits.reshape(tp.shape.f, n).astype(np.float64)
    # matches = ones@ones' + zeros@zeros'; avoids materializing the full
    # (f', f, c, h, w) comparison tensor.
    agree = x @ y.T + (1.0 - x) @ (1.0 - y).T
    return agree / n


def match_frames(s: np.ndarray, t_temp: float) -> np.ndarray:
    """Original position per tampered frame: argmax row score (smallest
    index on ties), or -1 when the best score is <= t_temp."""
    if not 0.5 < t_temp < 1.0:
        raise TemporalError(f"t_temp={t_temp} must lie in (0.5, 1)")
    best = np.argmax(s, axis=1)  # first occurrence wins ties
    best_score = s[np.arange(s.shape[0]), best]
    return np.where(best_score > t_temp, best, -1).astype(np.int64)


def best_match(s: np.ndarray) -> np.ndarray:
    """Raw argmax indices (pre-thresholding), used to build agreement bits."""
    return np.argmax(s, axis=1).astype(np.int64)


def build_cmp(iv: BitGrid4D, tp: BitGrid4D, m_best: np.ndarray) -> BitGrid4D:
    """Agreement bits CMP[p] = [IV_p == TP_{m_best[p]}], one row per
    tampered frame."""
    if iv.shape.dims[1:] != tp.shape.dims[1:]:
        raise TemporalError(
            f"per-frame dims differ: {iv.shape.dims[1:]} vs {tp.shape.dims[1:]}"
        )
    if len(m_best) != iv.shape.f:
        raise TemporalError("m_best length does not match tampered frame count")
    cmp_bits = (iv.bits == tp.bits[m_best]).astype(np.uint8)
    return BitGrid4D(Shape4(*cmp_bits.shape), cmp_bits)


def temporal_accuracy(pred: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of frames whose predicted original position matches the
    ground truth; -1 entries compare literally."""
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape:
        raise TemporalError(f"length mismatch: {pred.shape} vs {truth.shape}")
    return float(np.mean(pred == truth))
