"""Pixel-space tamper and distortion operations on video frame stacks.

Frame edits follow the same ground-truth convention as the core's latent
simulator: an origin array maps each output frame to its source index, with
-1 for frames that were not in the original video. Region tamper emits a
per-frame binary mask at pixel resolution (1 = tampered). Distortions model
common degradations; they produce no mask of their own.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

GROUND_TRUTH_SCHEMA = "noiseshield/ground-truth@1"


class TamperError(ValueError):
    pass


def apply_frame_edits(
    frames: np.ndarray, edits: list[dict], rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """drop / insert / swap edits; returns (frames, origin array)."""
    stack = [frames[i] for i in range(frames.shape[0])]
    origin = list(range(frames.shape[0]))
    for edit in edits:
        op, p = edit["op"], int(edit["p"])
        count = len(stack)
        if op == "drop":
            if count <= 1 or p >= count:
                raise TamperError(f"bad drop index {p} (frames={count})")
            stack.pop(p)
            origin.pop(p)
        elif op == "swap":
            if p + 1 >= count:
                raise TamperError(f"bad swap index {p} (frames={count})")
            stack[p], stack[p + 1] = stack[p + 1], stack[p]
            origin[p], origin[p + 1] = origin[p + 1], origin[p]
        elif op == "insert":
            if p > count:
                raise TamperError(f"bad insert index {p} (frames={count})")
            source = edit.get("source", "adjacent")
            if source == "adjacent":
                frame = stack[min(p, count - 1)].copy()
            elif source == "gaussian":
                frame = rng.integers(0, 256, size=stack[0].shape, dtype=np.uint16)
                frame = frame.astype(np.uint8)
            else:
                raise TamperError(f"unknown insert source {source!r}")
            stack.insert(p, frame)
            origin.insert(p, -1)
        else:
            raise TamperError(f"unknown edit op {op!r}")
    return np.stack(stack), np.array(origin, dtype=np.int64)


def crop_drop(
    frames: np.ndarray,
    ratio: float,
    mode: str,
    rng: np.random.Generator,
    fill: str = "black",
) -> tuple[np.ndarray, np.ndarray]:
    """Region tamper: "drop" blanks a band of the given area ratio, "crop"
    keeps it and blanks everything else. Returns (frames, mask) with the
    mask marking tampered pixels."""
    if not 0.0 < ratio < 1.0:
        raise TamperError(f"ratio {ratio} must lie in (0, 1)")
    if mode not in ("crop", "drop"):
        raise TamperError(f"mode must be crop or drop, got {mode!r}")
    if fill not in ("black", "flip"):
        raise TamperError(f"fill must be black or flip, got {fill!r}")
    f, height, width = frames.shape[:3]

    region = np.zeros((height, width), dtype=bool)
    if rng.integers(0, 2):  # vertical band
        band = max(1, round(width * ratio))
        x0 = int(rng.integers(0, width - band + 1))
        region[:, x0 : x0 + band] = True
    else:  # horizontal band
        band = max(1, round(height * ratio))
        y0 = int(rng.integers(0, height - band + 1))
        region[y0 : y0 + band, :] = True

    tampered_area = ~region if mode == "crop" else region
    out = frames.copy()
    if fill == "black":
        out[:, tampered_area] = 0
    else:
        flipped = frames[:, :, ::-1]
        out[:, tampered_area] = flipped[:, tampered_area]
    mask = np.broadcast_to(tampered_area, (f, height, width)).astype(np.uint8)
    return out, mask


def _to_float(frames: np.ndarray) -> np.ndarray:
    return frames.astype(np.float64) / 255.0


def _to_uint8(frames: np.ndarray) -> np.ndarray:
    return np.clip(np.round(frames * 255.0), 0, 255).astype(np.uint8)


def apply_distortion(
    frames: np.ndarray, name: str, param: float, rng: np.random.Generator
) -> np.ndarray:
    """One named degradation with its strength parameter."""
    x = _to_float(frames)
    if name == "gaussian_noise":
        return _to_uint8(x + rng.normal(0.0, param, x.shape))
    if name == "salt_pepper":
        out = frames.copy()
        flip = rng.random(frames.shape[:3]) < param
        salt = rng.random(frames.shape[:3]) < 0.5
        out[flip & salt] = 255
        out[flip & ~salt] = 0
        return out
    if name == "gaussian_blur":
        return _to_uint8(
            ndimage.gaussian_filter(x, sigma=(0, param, param, 0))
        )
    if name == "median_blur":
        k = int(param)
        return np.stack(
            [
                np.stack(
                    [
                        ndimage.median_filter(frame[..., ch], size=k)
                        for ch in range(3)
                    ],
                    axis=-1,
                )
                for frame in frames
            ]
        )
    if name == "brightness":
        return _to_uint8(x * param)
    if name == "frame_average":
        n = int(param)
        kernel = np.ones(n) / n
        padded = np.pad(x, ((n // 2, n - 1 - n // 2), (0, 0), (0, 0), (0, 0)), "edge")
        smoothed = np.stack(
            [padded[i : i + x.shape[0]] for i in range(n)]
        ).mean(axis=0)
        return _to_uint8(smoothed)
    if name == "frame_swap":
        out = frames.copy()
        f = out.shape[0]
        for p in range(0, f - 1, max(2, int(round(1.0 / param)))):
            out[[p, p + 1]] = out[[p + 1, p]]
        return out
    if name == "resize":
        factor = float(param)
        zoomed = ndimage.zoom(x, (1, factor, factor, 1), order=1)
        back = ndimage.zoom(
            zoomed,
            (
                1,
                frames.shape[1] / zoomed.shape[1],
                frames.shape[2] / zoomed.shape[2],
                1,
            ),
            order=1,
        )
        return _to_uint8(back)
    raise TamperError(f"unknown distortion {name!r}")


def ground_truth(
    positions: np.ndarray,
    mask_file: str | None,
    edits: list[dict],
    pixel_ops: list[dict],
) -> dict:
    """Ground-truth record in the same schema the core simulator emits."""
    return {
        "schema": GROUND_TRUTH_SCHEMA,
        "positions": [int(p) for p in positions],
        "mask_file": mask_file,
        "edits": edits,
        "channel": {"kind": "pixel", "ops": pixel_ops},
    }
