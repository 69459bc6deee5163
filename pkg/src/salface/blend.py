"""Saliency reweighting: the multiplicative preprocessing step.

The blend ratio ``alpha`` controls how strongly the saliency map
modulates the face. The weight map is the convex multiplier

    M = (1 - alpha) + alpha * S

so alpha 0 leaves the image untouched and alpha 1 multiplies by the raw
map. Var(M) = alpha^2 * Var(S) follows directly, which is why large
ratios flatten the input distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .imagekit import Image

__all__ = ["BlendConfig", "reweight_map", "apply_weight_map"]


@dataclass(frozen=True)
class BlendConfig:
    """Reweighted saliency ratio; 0.30 is the default operating point."""

    alpha: float = 0.30

    def __post_init__(self):
        _check_alpha(self.alpha)


def _check_alpha(alpha: float):
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must be in [0, 1], got {alpha}")


def reweight_map(sal_map: np.ndarray, alpha: float) -> np.ndarray:
    """Convex weight map (1 - alpha) + alpha * S, valued in [1 - alpha, 1]."""
    _check_alpha(alpha)
    return (1.0 - alpha) + alpha * np.asarray(sal_map, dtype=np.float64)


def apply_weight_map(img: Image, weights: np.ndarray) -> Image:
    """Multiply every channel by the shared single-channel weight map."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (img.height, img.width):
        raise ShapeError(
            f"weight map {w.shape} does not match image {img.height}x{img.width}"
        )
    return Image(np.clip(img.data * w[None, :, :], 0.0, 1.0))
