"""Real diffusion backend (opt-in, GPU scale).

Everything torch/diffusers lives behind lazy imports: the adapter works
fully without them, and the smoke path only activates when the optional
dependencies are installed and NOISESHIELD_ADAPTER_REAL=1 is set. Results
vary with model versions and driver stacks, so none of this is gated in CI.
"""

from __future__ import annotations

import numpy as np

from .profiles import PipelineProfile


class RealBackendUnavailable(RuntimeError):
    pass


def _load_torch_stack():
    try:
        import torch  # noqa: F401
        import diffusers  # noqa: F401
    except ImportError as exc:
        raise RealBackendUnavailable(
            "the real backend needs the 'real' extra: pip install "
            "noiseshield-adapter[real]"
        ) from exc
    return torch, diffusers


def generate_frames(
    latents: np.ndarray, profile: PipelineProfile, prompt: str, seed: int = 0
) -> np.ndarray:
    """Denoise the given initial latents into video frames."""
    torch, diffusers = _load_torch_stack()
    profile.check_latent_shape(latents.shape)
    device = "cuda" if torch.cuda.is_available() else "cpu"
    dtype = torch.float16 if device == "cuda" else torch.float32

    pipe = diffusers.DiffusionPipeline.from_pretrained(
        profile.model_id, torch_dtype=dtype
    ).to(device)
    pipe.scheduler = diffusers.DDIMScheduler.from_config(pipe.scheduler.config)

    # diffusers video pipelines take latents as (batch, c, f, h, w)
    init = (
        torch.from_numpy(latents.astype(np.float32))
        .permute(1, 0, 2, 3)[None]
        .to(device=device, dtype=dtype)
    )
    result = pipe(
        prompt,
        num_inference_steps=profile.inference_steps,
        guidance_scale=profile.guidance,
        height=profile.resolution,
        width=profile.resolution,
        num_frames=profile.frames,
        latents=init,
        generator=torch.Generator(device).manual_seed(seed),
        output_type="np",
    )
    frames = np.asarray(result.frames[0])
    return np.clip(frames * 255.0, 0, 255).astype(np.uint8)


def invert_frames(frames: np.ndarray, profile: PipelineProfile) -> np.ndarray:
    """VAE-encode the frames and run DDIM inversion back to initial noise."""
    torch, diffusers = _load_torch_stack()
    device = "cuda" if torch.cuda.is_available() else "cpu"
    dtype = torch.float16 if device == "cuda" else torch.float32

    pipe = diffusers.DiffusionPipeline.from_pretrained(
        profile.model_id, torch_dtype=dtype
    ).to(device)
    inverse = diffusers.DDIMInverseScheduler.from_config(pipe.scheduler.config)

    pixels = torch.from_numpy(frames.astype(np.float32) / 127.5 - 1.0)
    pixels = pixels.permute(0, 3, 1, 2).to(device=device, dtype=dtype)
    with torch.no_grad():
        latents = pipe.vae.encode(pixels).latent_dist.mode()
        latents = latents * pipe.vae.config.scaling_factor
        # (f, c, h, w) -> (1, c, f, h, w) for the temporal UNet
        sample = latents.permute(1, 0, 2, 3)[None]
        inverse.set_timesteps(profile.inversion_steps, device=device)
        encode = getattr(pipe, "encode_prompt", None)
        embeds = None
        if encode is not None:
            embeds = encode(
                "", device=device, num_images_per_prompt=1,
                do_classifier_free_guidance=False,
            )
            if isinstance(embeds, tuple):
                embeds = embeds[0]
        for t in inverse.timesteps:
            noise_pred = pipe.unet(sample, t, encoder_hidden_states=embeds).sample
            sample = inverse.step(noise_pred, t, sample).prev_sample
    recovered = sample[0].permute(1, 0, 2, 3).float().cpu().numpy()
    return recovered.astype(np.float64)
