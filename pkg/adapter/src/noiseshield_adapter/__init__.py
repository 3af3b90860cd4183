"""Adapter between the noiseshield core and video diffusion pipelines."""

from .formats import read_bits, read_latent, write_bits, write_latent
from .profiles import PipelineProfile, get_profile
from .video import load_video, save_video

__version__ = "0.1.0"

__all__ = [
    "PipelineProfile",
    "get_profile",
    "load_video",
    "read_bits",
    "read_latent",
    "save_video",
    "write_bits",
    "write_latent",
]
