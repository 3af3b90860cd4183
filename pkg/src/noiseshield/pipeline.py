"""End-to-end convenience paths: embed, extract, and localize.

These compose the codec, noise map, and both localizers the way the CLI and
evaluation harness use them. Before the spatial stage, agreement rows are
re-sorted into recovered original order (inserted frames slot in at their
best match) so block statistics see frames in their true arrangement; the
outputs are re-indexed back to the order of the analyzed video.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import chacha
from .bitcodec import (
    CodecError,
    RepeatFactors,
    WatermarkKey,
    WatermarkPayload,
    decrypt_template,
    encrypt_template,
    expand_payload,
    majority_extract,
)
from .calibration import ThresholdTable
from .noisemap import invert_bits, sample_noise
from .spatial import channel_average, finalize_mask, hstr
from .temporal import best_match, build_cmp, match_frames, score_matrix
from .tensors import BitGrid4D, LatentTensor, SeededRng, Shape4


def template_bits(
    payload: WatermarkPayload,
    key: WatermarkKey,
    shape: Shape4,
    factors: RepeatFactors,
) -> BitGrid4D:
    """Payload -> replicated grid -> whitened template bits."""
    return encrypt_template(expand_payload(payload, shape, factors), key)


def embed(
    payload: WatermarkPayload,
    key: WatermarkKey,
    shape: Shape4,
    factors: RepeatFactors,
    rng: SeededRng,
) -> tuple[LatentTensor, BitGrid4D]:
    """Produce watermarked noise and the template bits it encodes."""
    tp = template_bits(payload, key, shape, factors)
    return sample_noise(tp, rng), tp


def extract(
    latent: LatentTensor, key: WatermarkKey, factors: RepeatFactors
) -> WatermarkPayload:
    """Recover the payload: sign bits -> decrypt -> majority vote."""
    iv = invert_bits(latent)
    return majority_extract(decrypt_template(iv, key), factors)


def _frame_keystream_bits(
    key: WatermarkKey, f_orig: int, frame_bits: int
) -> np.ndarray:
    """Keystream bits reshaped to one row per original frame position."""
    total = f_orig * frame_bits
    ks = chacha.keystream(key.key, key.nonce, (total + 7) // 8, counter=0)
    bits = np.unpackbits(np.frombuffer(ks, dtype=np.uint8))[:total]
    return bits.reshape(f_orig, frame_bits)


def _frame_sync_scores(
    frame_bits_grid: np.ndarray, ks_rows: np.ndarray, shape, factors: RepeatFactors
) -> np.ndarray:
    """Replica-consistency score of every (frame, candidate position) pair.

    Decrypting a frame at its true position exposes the payload's repetition
    structure (each bit constant over its k_c x k_h x k_w in-frame replicas),
    so the mean per-cell majority fraction peaks there; wrong positions look
    like fair coin flips.
    """
    c, h, w = shape.c, shape.h, shape.w
    kc, kh, kw = factors.k_c, factors.k_h, factors.k_w
    reps = kc * kh * kw
    f_tampered = frame_bits_grid.shape[0]
    scores = np.empty((f_tampered, ks_rows.shape[0]))
    for p in range(f_tampered):
        d = frame_bits_grid[p][None, :] ^ ks_rows  # (f_orig, c*h*w)
        cells = d.reshape(-1, c // kc, kc, h // kh, kh, w // kw, kw)
        ones = cells.sum(axis=(2, 4, 6), dtype=np.int64)
        majority = np.maximum(ones, reps - ones) / reps
        scores[p] = majority.mean(axis=(1, 2, 3))
    return scores


def extract_synced(
    latent: LatentTensor,
    key: WatermarkKey,
    factors: RepeatFactors,
    f_orig: int,
) -> WatermarkPayload:
    """Payload recovery that tolerates frame rearrangement.

    The stream cipher is positional, so a shifted frame decrypted in place is
    pure noise. Each frame is first re-synchronized to its most consistent
    original position, then all aligned replicas vote per payload bit.
    Requires in-frame redundancy (k_c * k_h * k_w > 1).
    """
    if factors.k_c * factors.k_h * factors.k_w == 1:
        raise CodecError(
            "frame synchronization needs in-frame replication (k_c*k_h*k_w > 1)"
        )
    shape = latent.shape
    frame_bits = shape.c * shape.h * shape.w
    iv_rows = invert_bits(latent).bits.reshape(shape.f, frame_bits)
    ks_rows = _frame_keystream_bits(key, f_orig, frame_bits)
    scores = _frame_sync_scores(iv_rows, ks_rows, shape, factors)
    assignment = np.argmax(scores, axis=1)

    kf, kc, kh, kw = factors.dims
    reduced = (f_orig // kf, shape.c // kc, shape.h // kh, shape.w // kw)
    ones = np.zeros(reduced, dtype=np.int64)
    total = np.zeros(reduced, dtype=np.int64)
    reps = kc * kh * kw
    for p, q in enumerate(assignment):
        d = (iv_rows[p] ^ ks_rows[q]).reshape(shape.c, shape.h, shape.w)
        cells = d.reshape(reduced[1], kc, reduced[2], kh, reduced[3], kw)
        ones[q // kf] += cells.sum(axis=(1, 3, 5), dtype=np.int64)
        total[q // kf] += reps
    return WatermarkPayload((2 * ones > total).astype(np.uint8).reshape(-1))


@dataclass(frozen=True)
class LocalizationResult:
    positions: np.ndarray  # recovered original index per frame, -1 if foreign
    best: np.ndarray  # raw argmax match per frame
    scores: np.ndarray  # (f', f) agreement fractions
    m_ini: np.ndarray = field(repr=False)  # channel-averaged soft mask
    refined: np.ndarray = field(repr=False)  # hierarchical refined mask
    mask: np.ndarray = field(repr=False)  # binary tamper mask, 1 = tampered

    @property
    def soft_tamper(self) -> np.ndarray:
        """Scores oriented so larger means more tampered (for AUC)."""
        return 1.0 - self.refined


def localize(
    latent: LatentTensor, tp: BitGrid4D, table: ThresholdTable
) -> LocalizationResult:
    """Temporal matching followed by hierarchical spatial refinement."""
    iv = invert_bits(latent)
    scores = score_matrix(iv, tp)
    m_best = best_match(scores)
    positions = match_frames(scores, table.t_temp)
    cmp_bits = build_cmp(iv, tp, m_best)
    m_ini = channel_average(cmp_bits)

    # Restore recovered original order for block statistics, then map the
    # refined values back onto the analyzed video's frame order.
    order = np.argsort(np.where(positions >= 0, positions, m_best), kind="stable")
    refined_sorted = hstr(m_ini[order], table.hstr_config())
    refined = np.empty_like(refined_sorted)
    refined[order] = refined_sorted

    mask = finalize_mask(refined, table.tau, table.upscale)
    # Frames with no original position are foreign by definition: the binary
    # decision marks them wholly tampered even where coarse levels were
    # diluted by intact neighbors.
    mask[positions < 0] = 1
    return LocalizationResult(positions, m_best, scores, m_ini, refined, mask)
