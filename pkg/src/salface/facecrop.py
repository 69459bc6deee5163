"""Face bounding box expansion and canonical crop preparation.

A detected face box is grown around its center by a margin fraction,
cropped with edge replication for any out-of-bounds region, and rescaled
to a square canonical size (224 by default).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .imagekit import Image, crop_with_edge_pad, resize_bilinear

__all__ = ["BBox", "CropConfig", "expand_bbox", "prepare_face"]


@dataclass(frozen=True)
class BBox:
    """Pixel rectangle; may extend outside its image."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ConfigError(f"bbox must have w >= 1 and h >= 1, got {self.w}x{self.h}")


@dataclass(frozen=True)
class CropConfig:
    margin: float = 0.30
    out_size: int = 224

    def __post_init__(self):
        if self.margin < 0:
            raise ConfigError(f"margin must be >= 0, got {self.margin}")
        if self.out_size < 8:
            raise ConfigError(f"out_size must be >= 8, got {self.out_size}")


def _round_half_away(v: float) -> int:
    import math

    return int(math.floor(v + 0.5)) if v >= 0 else int(math.ceil(v - 0.5))


def expand_bbox(box: BBox, margin: float) -> BBox:
    """Grow width and height by (1 + margin), preserving the center.

    Coordinates round half away from zero to the integer pixel grid, so
    the center drifts at most half a pixel per axis.
    """
    if margin < 0:
        raise ConfigError(f"margin must be >= 0, got {margin}")
    return BBox(
        x=_round_half_away(box.x - margin * box.w / 2.0),
        y=_round_half_away(box.y - margin * box.h / 2.0),
        w=_round_half_away(box.w * (1.0 + margin)),
        h=_round_half_away(box.h * (1.0 + margin)),
    )


def prepare_face(img: Image, box: BBox, cfg: CropConfig) -> Image:
    """Expanded, edge-padded, square-resized face crop."""
    grown = expand_bbox(box, cfg.margin)
    patch = crop_with_edge_pad(img, grown)
    return resize_bilinear(patch, cfg.out_size, cfg.out_size)
