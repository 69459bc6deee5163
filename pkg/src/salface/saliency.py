"""Saliency map backends for face crops.

A saliency map is a (height, width) float64 array in ``[0, 1]``. Three
backends produce one:

* :func:`frequency_tuned` - per-pixel color distance between the blurred
  image and the global mean color,
* :func:`center_surround` - averaged absolute differences between fine
  and coarse Gaussian-pyramid levels of the luminance plane,
* :func:`load_external_map` - import of a precomputed map from a PGM
  stream (for predictors that live outside this package).

All backends share one 5x5 Gaussian blur (sigma 1.0, edge-clamped
borders) and min-max normalization with the convention that a constant
map normalizes to all zeros.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DecodeError
from .imagekit import Image, load_pnm, resize_bilinear, to_grayscale

__all__ = [
    "frequency_tuned",
    "center_surround",
    "load_external_map",
    "normalize",
    "gaussian_blur",
    "map_to_image",
]

# 5-tap kernel for sigma = 1.0: exp(-i^2 / 2), i in -2..2, normalized.
_TAPS = np.exp(-0.5 * np.arange(-2.0, 3.0) ** 2)
_TAPS /= _TAPS.sum()


def _blur_axis(arr: np.ndarray, axis: int) -> np.ndarray:
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (2, 2)
    padded = np.pad(arr, pad, mode="edge")
    out = np.zeros_like(arr)
    for i, tap in enumerate(_TAPS):
        window = [slice(None)] * arr.ndim
        window[axis] = slice(i, i + arr.shape[axis])
        out += tap * padded[tuple(window)]
    return out


def gaussian_blur(plane: np.ndarray) -> np.ndarray:
    """Separable 5x5 Gaussian blur (sigma 1.0) with edge-clamped borders."""
    return _blur_axis(_blur_axis(plane, 0), 1)


def normalize(sal_map: np.ndarray) -> np.ndarray:
    """Min-max rescale to [0, 1]; a constant map becomes all zeros.

    "Constant" includes maps whose spread is pure floating-point dust
    (span below 1e-12 relative to the values); stretching that noise to
    full scale would fabricate structure out of rounding error.
    """
    m = np.asarray(sal_map, dtype=np.float64)
    lo = m.min()
    hi = m.max()
    if hi - lo <= 1e-12 * max(1.0, abs(hi), abs(lo)):
        return np.zeros_like(m)
    return (m - lo) / (hi - lo)


def frequency_tuned(img: Image) -> np.ndarray:
    """Color-vs-mean contrast saliency.

    Per channel, take the global mean and the blurred plane; the raw map
    is the euclidean distance between them across channels, min-max
    normalized.
    """
    raw = np.zeros((img.height, img.width), dtype=np.float64)
    for c in range(img.channels):
        plane = img.data[c]
        raw += (plane.mean() - gaussian_blur(plane)) ** 2
    return normalize(np.sqrt(raw))


def _resize_plane(plane: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    return resize_bilinear(Image.from_array(plane), out_w, out_h).plane(0)


def center_surround(img: Image, levels: int = 3) -> np.ndarray:
    """Fine-vs-coarse pyramid contrast saliency on the luminance plane.

    Builds a Gaussian pyramid with 2x decimation after each blur, takes
    |level l - upsampled level l+2| for every pair with l+2 <= levels,
    upsamples the differences to full resolution, and averages.
    """
    if not 2 <= levels <= 5:
        raise ConfigError(f"levels must be in 2..5, got {levels}")
    if min(img.width, img.height) < 2**levels:
        raise ConfigError(
            f"image {img.width}x{img.height} too small for {levels} pyramid levels "
            f"(needs at least {2**levels} per side)"
        )
    lum = to_grayscale(img).plane(0)
    pyramid = [lum]
    for _ in range(levels):
        pyramid.append(gaussian_blur(pyramid[-1])[::2, ::2])
    acc = np.zeros_like(lum)
    pairs = 0
    for lvl in range(levels - 1):
        fine = pyramid[lvl]
        coarse = _resize_plane(pyramid[lvl + 2], fine.shape[1], fine.shape[0])
        diff = np.abs(fine - coarse)
        acc += _resize_plane(diff, img.width, img.height)
        pairs += 1
    return normalize(acc / pairs)


def load_external_map(data: bytes, target_w: int, target_h: int) -> np.ndarray:
    """Decode a P5 PGM map, resize to the target, and normalize."""
    img = load_pnm(data)
    if img.channels != 1:
        raise DecodeError("external saliency map must be a P5 PGM (one channel)")
    resized = resize_bilinear(img, target_w, target_h)
    return normalize(resized.plane(0))


def map_to_image(sal_map: np.ndarray) -> Image:
    """Wrap a saliency map as a grayscale image (for PGM export)."""
    return Image.from_array(np.asarray(sal_map, dtype=np.float64))
