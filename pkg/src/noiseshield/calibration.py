"""Threshold calibration from synthetic watermarked/original runs.

For each level, the block-score distribution is sampled on two populations:
watermarked latents pushed through the configured channel, and unwatermarked
bits compared against the same templates. Per-level thresholds are the
(100-k)% quantile of the watermarked scores and the k% quantile of the
original scores; calibrating with a noisy channel widens the watermarked
distribution downward, which is how distortion-adjusted tables are built.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bitcodec import (
    RepeatFactors,
    WatermarkKey,
    encrypt_template,
    expand_payload,
    random_payload,
)
from .channel import ChannelSpec, apply_channel
from .noisemap import invert_bits, sample_noise
from .spatial import HstrConfig, channel_average, gather_average
from .tensors import BitGrid4D, SeededRng, Shape4

MIN_SAMPLES_PER_LEVEL = 1000

# Per-instance stream offsets within the calibration stream range.
_PAYLOAD, _NOISE, _ORIG = 0, 1, 2


class CalibrationError(ValueError):
    """Raised on invalid quantiles or insufficient samples."""


@dataclass(frozen=True)
class AccuracySamples:
    """Pooled per-level block scores from one population."""

    levels: tuple[np.ndarray, ...]
    provenance: str  # "watermarked" | "original"
    channel: ChannelSpec
    n_instances: int

    def counts(self) -> list[int]:
        return [int(a.size) for a in self.levels]


@dataclass(frozen=True)
class LevelThresholds:
    mu: int
    t_wm: float
    t_orig: float
    clamped: bool = False

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "t_wm": self.t_wm,
            "t_orig": self.t_orig,
            "clamped": self.clamped,
        }


@dataclass(frozen=True)
class ThresholdTable:
    """Everything the localizer needs: per-level thresholds plus the
    temporal threshold and final binarization settings."""

    quantile_k: int
    levels: tuple[LevelThresholds, ...]
    t_temp: float
    tau: float
    upscale: int = 1
    meta: dict = field(default_factory=dict)

    def hstr_config(self) -> HstrConfig:
        return HstrConfig(
            levels=len(self.levels),
            thresholds=tuple((lv.t_wm, lv.t_orig) for lv in self.levels),
            tau=self.tau,
            upscale=self.upscale,
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "quantile_k": self.quantile_k,
                "t_temp": self.t_temp,
                "tau": self.tau,
                "upscale": self.upscale,
                "levels": [lv.to_dict() for lv in self.levels],
                "meta": self.meta,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ThresholdTable":
        obj = json.loads(text)
        levels = tuple(
            LevelThresholds(
                int(lv["mu"]),
                float(lv["t_wm"]),
                float(lv["t_orig"]),
                bool(lv.get("clamped", False)),
            )
            for lv in obj["levels"]
        )
        return cls(
            quantile_k=int(obj["quantile_k"]),
            levels=levels,
            t_temp=float(obj["t_temp"]),
            tau=float(obj["tau"]),
            upscale=int(obj.get("upscale", 1)),
            meta=obj.get("meta", {}),
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "ThresholdTable":
        return cls.from_json(Path(path).read_text())


def _level_scores(m_ini: np.ndarray, levels: int) -> list[np.ndarray]:
    return [gather_average(m_ini, 2 ** (l - 1)).reshape(-1) for l in range(1, levels + 1)]


def sample_distributions(
    n_videos: int,
    shape: Shape4,
    factors: RepeatFactors,
    key: WatermarkKey,
    channel: ChannelSpec,
    levels: int,
    rng: SeededRng,
) -> tuple[AccuracySamples, AccuracySamples]:
    """Collect per-level block scores for the watermarked population (full
    chain through `channel`) and the original population (independent random
    bits against the same templates)."""
    if n_videos < 1:
        raise CalibrationError("need at least one instance")
    mu_max = 2 ** (levels - 1)
    for name, dim in zip("fhw", (shape.f, shape.h, shape.w)):
        if dim % mu_max:
            raise CalibrationError(
                f"coarsest level mu={mu_max} does not divide {name}={dim}"
            )
    n_bits = factors.n_bits(shape)
    wm_levels = [[] for _ in range(levels)]
    orig_levels = [[] for _ in range(levels)]
    for i in range(n_videos):
        base = rng.stream + 4 * i
        payload = random_payload(n_bits, rng.with_stream(base + _PAYLOAD))
        tp = encrypt_template(expand_payload(payload, shape, factors), key)
        z = sample_noise(tp, rng.with_stream(base + _NOISE))
        z_chan = apply_channel(z, channel.with_seed(channel.seed + i))
        iv = invert_bits(z_chan)
        cmp_wm = BitGrid4D(shape, (iv.bits == tp.bits).astype(np.uint8))

        orig_gen = rng.with_stream(base + _ORIG).generator()
        iv_orig = orig_gen.integers(0, 2, size=shape.dims, dtype=np.uint8)
        cmp_orig = BitGrid4D(shape, (iv_orig == tp.bits).astype(np.uint8))

        for lvl, scores in enumerate(_level_scores(channel_average(cmp_wm), levels)):
            wm_levels[lvl].append(scores)
        for lvl, scores in enumerate(_level_scores(channel_average(cmp_orig), levels)):
            orig_levels[lvl].append(scores)

    pack = lambda acc: tuple(np.concatenate(parts) for parts in acc)
    return (
        AccuracySamples(pack(wm_levels), "watermarked", channel, n_videos),
        AccuracySamples(pack(orig_levels), "original", channel, n_videos),
    )


def _check_k(k) -> int:
    if float(k) != int(k):
        raise CalibrationError(f"quantile k={k} must be an integer percent")
    k = int(k)
    if not 50 < k <= 100:
        raise CalibrationError(f"quantile k={k} must lie in (50, 100]")
    return k


def quantile_interval(samples: np.ndarray, k) -> tuple[float, float]:
    """[(100-k)%, k%] empirical quantiles under the nearest-rank definition."""
    k = _check_k(k)
    x = np.sort(np.asarray(samples, dtype=np.float64).reshape(-1))
    n = x.size
    if n == 0:
        raise CalibrationError("empty sample set")

    def nearest_rank(pct: int) -> float:
        rank = max(1, -(-pct * n // 100))  # ceil(pct*n/100), clipped to >= 1
        return float(x[rank - 1])

    return nearest_rank(100 - k), nearest_rank(k)


def derive_thresholds(
    wm: AccuracySamples,
    orig: AccuracySamples,
    k,
    t_temp: float,
    tau: float,
    upscale: int = 1,
) -> ThresholdTable:
    """Per level: t_wm from the watermarked lower quantile, t_orig from the
    original upper quantile. Levels where the populations fail to separate
    (t_wm > t_orig) are clamped to their midpoint and flagged."""
    k = _check_k(k)
    if len(wm.levels) != len(orig.levels):
        raise CalibrationError("watermarked/original level counts differ")
    levels = []
    for lvl, (wm_scores, orig_scores) in enumerate(zip(wm.levels, orig.levels), 1):
        if wm_scores.size < MIN_SAMPLES_PER_LEVEL or orig_scores.size < MIN_SAMPLES_PER_LEVEL:
            raise CalibrationError(
                f"level {lvl}: need >= {MIN_SAMPLES_PER_LEVEL} samples per "
                f"population, got {wm_scores.size}/{orig_scores.size}"
            )
        t_wm, _ = quantile_interval(wm_scores, k)
        _, t_orig = quantile_interval(orig_scores, k)
        clamped = t_wm > t_orig
        if clamped:
            t_wm = t_orig = (t_wm + t_orig) / 2.0
        levels.append(LevelThresholds(2 ** (lvl - 1), t_wm, t_orig, clamped))
    meta = {
        "channel": wm.channel.to_dict(),
        "n_instances": wm.n_instances,
        "samples_per_level": wm.counts(),
    }
    return ThresholdTable(k, tuple(levels), t_temp, tau, upscale, meta)
