"""Template bits <-> Gaussian noise: truncated sampling and sign inversion.

Each template bit selects a half-interval of N(0,1): bit 0 the nonpositive
half, bit 1 the positive half. A uniform draw is pushed through the normal
quantile function within the selected half, so with balanced random bits
the marginal over all elements is exactly standard Gaussian, while sign
inversion recovers every bit without error.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .tensors import BitGrid4D, LatentTensor, SeededRng

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))

# Smallest uniform draw admitted to the quantile function; keeps samples
# finite and bounds magnitudes at |ppf(2^-54)| ~ 8.3.
_U_FLOOR = 2.0**-53


def pdf(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-0.5 * x * x) / _SQRT_2PI


def cdf(x):
    """Standard normal CDF."""
    return special.ndtr(np.asarray(x, dtype=np.float64))


def ppf(p):
    """Standard normal percentile (quantile) function."""
    return special.ndtri(np.asarray(p, dtype=np.float64))


def half_interval_magnitudes(u: np.ndarray) -> np.ndarray:
    """Map uniforms in (0,1) to strictly positive half-interval magnitudes.

    -ppf(u/2) is the inverse-CDF sample of |N(0,1)|; evaluating the positive
    branch via this reflection avoids the cancellation in (1+u)/2 near 0.5
    that would otherwise let a bit-1 sample collapse to exactly zero.
    """
    u = np.maximum(u, _U_FLOOR)
    return -special.ndtri(0.5 * u)


def sample_noise(tp: BitGrid4D, rng: SeededRng) -> LatentTensor:
    """Draw watermarked noise: bit 0 -> sample <= 0, bit 1 -> sample > 0,
    each from its truncated half of N(0,1)."""
    gen = rng.generator()
    u = gen.random(tp.shape.count)
    mag = half_interval_magnitudes(u)
    signs = np.where(tp.bits.reshape(-1) == 1, 1.0, -1.0)
    return LatentTensor(tp.shape, signs * mag)


def invert_bits(z: LatentTensor) -> BitGrid4D:
    """Recover bits from noise signs: nonpositive -> 0, positive -> 1."""
    data = z.data
    if np.isnan(data).any():
        raise ValueError("latent tensor contains NaN")
    return BitGrid4D(z.shape, (data > 0.0).astype(np.uint8))
