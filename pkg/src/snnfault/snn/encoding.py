"""Rate coding of pixel intensities into Bernoulli spike trains."""

from __future__ import annotations

import numpy as np

from snnfault.errors import DataError


def encode_rate(
    image: np.ndarray,
    steps: int,
    max_rate: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Encode one image as a (steps, n_pixels) boolean spike grid.

    Pixel p (0..255) fires independently each step with probability
    (p / 255) * max_rate, so the expected spike count is proportional to
    intensity. Deterministic for a given generator state.
    """
    image = np.asarray(image)
    if image.ndim != 1:
        raise DataError(f"image must be a flat vector, got shape {image.shape}")
    if steps <= 0:
        raise DataError(f"steps must be positive, got {steps}")
    if not (0.0 < max_rate <= 1.0):
        raise DataError(f"max_rate must be in (0, 1], got {max_rate}")
    values = image.astype(np.float64)
    if values.min(initial=0.0) < 0 or values.max(initial=0.0) > 255:
        raise DataError("pixel intensities must lie in [0, 255]")
    probs = (values / 255.0) * max_rate
    return rng.random((steps, image.size)) < probs
