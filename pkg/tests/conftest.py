import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from noiseshield import (
    RepeatFactors,
    SeededRng,
    Shape4,
    WatermarkKey,
)

settings.register_profile(
    "ci",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")

MS_SHAPE = Shape4(16, 4, 32, 32)
MS_FACTORS = RepeatFactors(8, 1, 4, 4)
SVD_SHAPE = Shape4(16, 4, 64, 64)
SVD_FACTORS = RepeatFactors(8, 1, 8, 8)


@pytest.fixture(scope="session")
def fixed_key() -> WatermarkKey:
    return WatermarkKey(bytes(range(32)), bytes(range(12)))


@pytest.fixture()
def rng() -> SeededRng:
    return SeededRng(2024)


def random_bits(shape: Shape4, seed: int) -> np.ndarray:
    gen = SeededRng(seed, 77).generator()
    return gen.integers(0, 2, size=shape.dims, dtype=np.uint8)
