"""Constants shared by both kernel backends."""

from __future__ import annotations

import numpy as np

# Structural-similarity filter window: 11-tap Gaussian, sigma 1.5
# (the classic choice for the index), normalized to sum 1.
GAUSS_RADIUS = 5
GAUSS_SIGMA = 1.5


def _gauss_kernel() -> np.ndarray:
    x = np.arange(-GAUSS_RADIUS, GAUSS_RADIUS + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * GAUSS_SIGMA * GAUSS_SIGMA))
    k /= k.sum()
    k.flags.writeable = False
    return k


GAUSS_KERNEL = _gauss_kernel()
