"""Deterministic stand-in for a diffusion pipeline.

"Generation" quantizes each latent value to 16 bits and writes it into the
pixel block that cell owns: latent cell (j, k) maps to the vae_factor-sized
block at (j, k), with the four channels stored in the block's quadrants
(R = high byte, G = low byte). "Inversion" reads the quadrant corners back.
The round trip is exact to one quantization step (~2.6e-4 in latent units),
so watermark signs survive, and pixel tamper corrupts exactly the latent
cells underneath it for all channels, the locality a real VAE gives.
"""

from __future__ import annotations

import numpy as np

from .profiles import PipelineProfile, ProfileError

# Latent values land in [-8.3, 8.3]; headroom keeps clipping rare.
_CLIP = 8.5
_SPAN = 2.0 * _CLIP


def _geometry(profile: PipelineProfile) -> int:
    if profile.channels != 4:
        raise ProfileError("mock backend renders exactly 4 latent channels")
    if profile.vae_factor % 2:
        raise ProfileError("mock backend needs an even VAE factor")
    return profile.vae_factor


def _quadrant(channel: int, half: int) -> tuple[int, int]:
    return (channel // 2) * half, (channel % 2) * half


def generate_frames(latents: np.ndarray, profile: PipelineProfile) -> np.ndarray:
    """Render latents (f, 4, h, w) into uint8 frames (f, h*s, w*s, 3)."""
    profile.check_latent_shape(latents.shape)
    s = _geometry(profile)
    half = s // 2
    q = np.clip((np.asarray(latents) + _CLIP) / _SPAN, 0.0, 1.0)
    code = np.round(q * 65535.0).astype(np.uint16)
    high = (code >> 8).astype(np.uint8)
    low = (code & 0xFF).astype(np.uint8)

    f, _, h, w = latents.shape
    frames = np.zeros((f, h * s, w * s, 3), dtype=np.uint8)
    for channel in range(4):
        qy, qx = _quadrant(channel, half)
        for dy in range(half):
            for dx in range(half):
                block = frames[:, qy + dy :: s, qx + dx :: s]
                block[..., 0] = high[:, channel]
                block[..., 1] = low[:, channel]
                block[..., 2] = high[:, channel]
    return frames


def invert_frames(frames: np.ndarray, profile: PipelineProfile) -> np.ndarray:
    """Recover latents from rendered frames; frame count may differ from the
    profile when the video was temporally tampered."""
    s = _geometry(profile)
    half = s // 2
    height, width = frames.shape[1:3]
    if height % s or width % s:
        raise ProfileError(
            f"frame size {(height, width)} is not a multiple of the VAE factor {s}"
        )
    if (height // s, width // s) != (profile.latent_hw, profile.latent_hw):
        raise ProfileError(
            f"frame size {(height, width)} does not match profile "
            f"{profile.name} ({profile.resolution} square)"
        )
    f = frames.shape[0]
    latents = np.empty((f, 4, height // s, width // s), dtype=np.float64)
    for channel in range(4):
        qy, qx = _quadrant(channel, half)
        tile = frames[:, qy::s, qx::s]
        code = tile[..., 0].astype(np.uint16) << 8 | tile[..., 1].astype(np.uint16)
        latents[:, channel] = code.astype(np.float64) / 65535.0 * _SPAN - _CLIP
    return latents
