"""Simulated inversion channels and latent-space tamper operations.

The channels stand in for the whole generate/distort/invert pipeline: an
identity channel models perfect inversion, a bitflip channel flips element
signs at a fixed rate (redrawing magnitudes so the marginal stays Gaussian),
and a gaussian channel adds white noise. Tamper operations rearrange frames
or overwrite masked regions with fresh noise, and always emit the ground
truth the evaluators need.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Literal, Optional

import numpy as np

from .noisemap import half_interval_magnitudes
from .tensors import LatentTensor, SeededRng, Shape4

CHANNEL_KINDS = ("identity", "bitflip", "gaussian")

# Fixed stream ids so channel noise, frame inserts, and region redraws are
# independently reproducible from one seed.
_STREAM_CHANNEL = 0x43484E4C  # "CHNL"
_STREAM_INSERT = 0x494E5352  # "INSR"
_STREAM_REGION = 0x5245474E  # "REGN"


class ChannelError(ValueError):
    """Raised for invalid channel or tamper parameters."""


@dataclass(frozen=True)
class ChannelSpec:
    """Channel kind plus its single parameter and a seed.

    bitflip: param = flip rate in [0, 0.5]; gaussian: param = noise scale >= 0.
    """

    kind: Literal["identity", "bitflip", "gaussian"]
    param: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ChannelError(f"unknown channel kind {self.kind!r}")
        if self.kind == "bitflip" and not 0.0 <= self.param <= 0.5:
            raise ChannelError(f"bitflip rate {self.param} outside [0, 0.5]")
        if self.kind == "gaussian" and self.param < 0.0:
            raise ChannelError(f"gaussian scale {self.param} must be >= 0")

    def with_seed(self, seed: int) -> "ChannelSpec":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "param": self.param, "seed": self.seed}

    @classmethod
    def from_dict(cls, obj: dict) -> "ChannelSpec":
        return cls(obj["kind"], float(obj.get("param", 0.0)), int(obj.get("seed", 0)))

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "ChannelSpec":
        """Parse CLI syntax: identity | bitflip:0.1 | gaussian:0.5."""
        kind, _, arg = text.partition(":")
        if kind == "identity":
            return cls("identity", 0.0, seed)
        if kind in ("bitflip", "gaussian"):
            if not arg:
                raise ChannelError(f"channel {kind!r} requires a parameter")
            return cls(kind, float(arg), seed)
        raise ChannelError(f"unknown channel {text!r}")


def apply_channel(z: LatentTensor, spec: ChannelSpec) -> LatentTensor:
    """Corrupt a latent tensor per the channel spec; identity returns it as is."""
    if spec.kind == "identity":
        return z
    gen = SeededRng(spec.seed, _STREAM_CHANNEL).generator()
    data = z.data.reshape(-1)
    if spec.kind == "gaussian":
        out = data + spec.param * gen.standard_normal(data.size)
        return LatentTensor(z.shape, out)
    # bitflip: flip signs independently, redrawing the magnitude from the
    # opposite half-interval so the N(0,1) marginal is preserved.
    flip = gen.random(data.size) < spec.param
    mag = half_interval_magnitudes(gen.random(data.size))
    flipped_bits = (data > 0.0) ^ flip
    out = np.where(flip, np.where(flipped_bits, mag, -mag), data)
    return LatentTensor(z.shape, out)


@dataclass(frozen=True)
class TemporalEdit:
    """One frame edit: drop(p), insert(p, source), or swap(p) of frames p, p+1."""

    op: Literal["drop", "insert", "swap"]
    p: int
    source: Optional[Literal["adjacent", "gaussian"]] = None

    def __post_init__(self):
        if self.op not in ("drop", "insert", "swap"):
            raise ChannelError(f"unknown temporal op {self.op!r}")
        if self.op == "insert" and self.source not in ("adjacent", "gaussian"):
            raise ChannelError("insert requires source 'adjacent' or 'gaussian'")
        if self.op != "insert" and self.source is not None:
            raise ChannelError(f"{self.op} takes no source")
        if self.p < 0:
            raise ChannelError(f"frame index {self.p} must be nonnegative")

    def to_dict(self) -> dict:
        d = {"op": self.op, "p": self.p}
        if self.source is not None:
            d["source"] = self.source
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "TemporalEdit":
        return cls(obj["op"], int(obj["p"]), obj.get("source"))


def edits_from_json(text: str) -> list[TemporalEdit]:
    return [TemporalEdit.from_dict(o) for o in json.loads(text)]


def edits_to_json(edits: list[TemporalEdit]) -> str:
    return json.dumps([e.to_dict() for e in edits])


def permutation_to_edits(perm) -> list[TemporalEdit]:
    """Decompose a frame permutation (output slot -> original index) into
    adjacent swaps that realize it."""
    perm = list(perm)
    if sorted(perm) != list(range(len(perm))):
        raise ChannelError("not a permutation of 0..f-1")
    # Bubble the current arrangement into `perm`, recording each swap.
    current = list(range(len(perm)))
    edits = []
    for i in range(len(perm)):
        j = current.index(perm[i])
        while j > i:
            current[j - 1], current[j] = current[j], current[j - 1]
            edits.append(TemporalEdit("swap", j - 1))
            j -= 1
    return edits


def tamper_temporal(
    z: LatentTensor, edits: list[TemporalEdit], rng: SeededRng | None = None
) -> tuple[LatentTensor, np.ndarray]:
    """Apply frame edits in order; returns the edited tensor and the ground
    truth array mapping each output frame to its original index (-1 for
    frames that were not in the original video)."""
    frames = [z.data[q] for q in range(z.shape.f)]
    origin = list(range(z.shape.f))
    gen = None
    for e in edits:
        f_cur = len(frames)
        if e.op == "drop":
            if f_cur <= 1:
                raise ChannelError("drop would leave no frames")
            if e.p >= f_cur:
                raise ChannelError(f"drop index {e.p} out of range (f={f_cur})")
            frames.pop(e.p)
            origin.pop(e.p)
        elif e.op == "swap":
            if e.p + 1 >= f_cur:
                raise ChannelError(f"swap index {e.p} out of range (f={f_cur})")
            frames[e.p], frames[e.p + 1] = frames[e.p + 1], frames[e.p]
            origin[e.p], origin[e.p + 1] = origin[e.p + 1], origin[e.p]
        else:  # insert
            if e.p > f_cur:
                raise ChannelError(f"insert index {e.p} out of range (f={f_cur})")
            if e.source == "adjacent":
                neighbor = min(e.p, f_cur - 1)
                frame = frames[neighbor].copy()
            else:
                if rng is None:
                    raise ChannelError("gaussian insert requires an rng")
                if gen is None:
                    gen = rng.with_stream(_STREAM_INSERT).generator()
                frame = gen.standard_normal(frames[0].shape)
            frames.insert(e.p, frame)
            origin.insert(e.p, -1)
    out_shape = Shape4(len(frames), z.shape.c, z.shape.h, z.shape.w)
    return (
        LatentTensor(out_shape, np.stack(frames)),
        np.array(origin, dtype=np.int64),
    )


@dataclass(frozen=True)
class RegionMask:
    """Per-frame binary mask over (h, w); 1 marks the tampered region."""

    mask: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.mask, dtype=np.uint8)
        if arr.ndim != 3:
            raise ChannelError("region mask must have shape (frames, h, w)")
        if arr.size and arr.max() > 1:
            raise ChannelError("region mask values must be 0 or 1")
        arr.flags.writeable = False
        object.__setattr__(self, "mask", arr)

    @classmethod
    def rectangle(
        cls,
        shape: Shape4,
        frames: tuple[int, int],
        rows: tuple[int, int],
        cols: tuple[int, int],
    ) -> "RegionMask":
        mask = np.zeros((shape.f, shape.h, shape.w), dtype=np.uint8)
        mask[frames[0] : frames[1], rows[0] : rows[1], cols[0] : cols[1]] = 1
        return cls(mask)


def random_block_region(
    shape: Shape4, align: int, rng: SeededRng, max_frac: float = 0.5
) -> RegionMask:
    """Random cuboid region with bounds aligned to `align` along frames,
    rows, and columns; each extent is at most max_frac of its axis."""
    if align < 1:
        raise ChannelError("align must be >= 1")
    for name, dim in zip("fhw", (shape.f, shape.h, shape.w)):
        if dim % align:
            raise ChannelError(f"align={align} does not divide {name}={dim}")
    gen = rng.with_stream(_STREAM_REGION + 1).generator()
    bounds = []
    for dim in (shape.f, shape.h, shape.w):
        blocks = dim // align
        extent = int(gen.integers(1, max(1, int(blocks * max_frac)) + 1))
        start = int(gen.integers(0, blocks - extent + 1))
        bounds.append((start * align, (start + extent) * align))
    return RegionMask.rectangle(shape, *bounds)


def tamper_spatial(z: LatentTensor, mask: RegionMask, rng: SeededRng) -> LatentTensor:
    """Replace all channels of masked positions with fresh N(0,1) draws."""
    f, c, h, w = z.shape.dims
    if mask.mask.shape != (f, h, w):
        raise ChannelError(
            f"mask shape {mask.mask.shape} does not match latent {(f, h, w)}"
        )
    gen = rng.with_stream(_STREAM_REGION).generator()
    sel = np.broadcast_to(mask.mask[:, None, :, :].astype(bool), z.shape.dims)
    out = z.data.copy()
    out[sel] = gen.standard_normal(int(sel.sum()))
    return LatentTensor(z.shape, out)
