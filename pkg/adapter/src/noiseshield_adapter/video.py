"""Minimal video container.

Videos are uint8 RGB frame stacks of shape (frames, height, width, 3). The
native container is .npz (exact, dependency-free); .gif and .mp4 are read
and written through imageio when it is installed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


class VideoError(ValueError):
    pass


def _validate(frames: np.ndarray) -> np.ndarray:
    frames = np.asarray(frames)
    if frames.ndim != 4 or frames.shape[-1] != 3 or frames.dtype != np.uint8:
        raise VideoError("video must be uint8 with shape (frames, h, w, 3)")
    return frames


def save_video(path, frames: np.ndarray, fps: int = 8) -> None:
    frames = _validate(frames)
    path = Path(path)
    if path.suffix == ".npz":
        np.savez_compressed(path, frames=frames, fps=np.int64(fps))
        return
    try:
        import imageio.v3 as iio
    except ImportError as exc:
        raise VideoError(
            f"writing {path.suffix} requires imageio; use .npz instead"
        ) from exc
    iio.imwrite(path, frames, fps=fps)


def load_video(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise VideoError(f"{path}: no such video")
    if path.suffix == ".npz":
        with np.load(path) as archive:
            return _validate(archive["frames"])
    try:
        import imageio.v3 as iio
    except ImportError as exc:
        raise VideoError(
            f"reading {path.suffix} requires imageio; use .npz instead"
        ) from exc
    frames = np.asarray(iio.imread(path))
    if frames.ndim == 3:
        frames = frames[None]
    return _validate(frames[..., :3])
