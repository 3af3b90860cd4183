"""Pipeline profiles: everything model-specific the adapter needs to know."""

from __future__ import annotations

from dataclasses import dataclass, replace


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineProfile:
    """One generation/inversion configuration.

    The latent grid implied by (frames, channels, resolution / vae_factor)
    must match the shape the watermarked noise was embedded at.
    """

    name: str
    model_id: str
    resolution: int
    frames: int
    channels: int = 4
    inference_steps: int = 25
    inversion_steps: int = 25
    guidance: float = 9.0
    scheduler: str = "ddim"
    vae_factor: int = 8

    def __post_init__(self):
        if self.resolution % self.vae_factor:
            raise ProfileError(
                f"resolution {self.resolution} not divisible by VAE factor "
                f"{self.vae_factor}"
            )
        for field in ("resolution", "frames", "channels", "inference_steps",
                      "inversion_steps", "vae_factor"):
            if getattr(self, field) < 1:
                raise ProfileError(f"{field} must be positive")

    @property
    def latent_hw(self) -> int:
        return self.resolution // self.vae_factor

    @property
    def latent_shape(self) -> tuple[int, int, int, int]:
        return (self.frames, self.channels, self.latent_hw, self.latent_hw)

    def check_latent_shape(self, shape: tuple[int, int, int, int]) -> None:
        if tuple(shape) != self.latent_shape:
            raise ProfileError(
                f"latent shape {tuple(shape)} does not match profile "
                f"{self.name} ({self.latent_shape})"
            )

    def with_model(self, model_id: str) -> "PipelineProfile":
        return replace(self, model_id=model_id)


PROFILES = {
    # text-to-video at 256px: 16 frames, 32x32 latents
    "t2v-256": PipelineProfile(
        name="t2v-256",
        model_id="damo-vilab/text-to-video-ms-1.7b",
        resolution=256,
        frames=16,
    ),
    # image-to-video at 512px: 16 frames, 64x64 latents
    "i2v-512": PipelineProfile(
        name="i2v-512",
        model_id="stabilityai/stable-video-diffusion-img2vid",
        resolution=512,
        frames=16,
        guidance=3.0,
        scheduler="euler",
    ),
    # deterministic stand-in used by the test suite; no model required
    "mock-256": PipelineProfile(
        name="mock-256",
        model_id="mock",
        resolution=256,
        frames=16,
    ),
}


def get_profile(name: str) -> PipelineProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ProfileError(
            f"unknown profile {name!r}; available: {sorted(PROFILES)}"
        ) from None
