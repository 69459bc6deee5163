"""Training-time augmentation: identity, horizontal flip, +3 and -3 degrees.

Four variants per image, applied to training folds only. The module
keeps a call counter so tests can assert that evaluation paths never
augment.
"""

from __future__ import annotations

from ..imagekit import Image, flip_horizontal, rotate

__all__ = ["ROTATION_DEGREES", "augment", "aligned_variants", "call_count",
           "reset_call_count"]

ROTATION_DEGREES = 3.0

call_count = 0


def aligned_variants(img: Image) -> list[Image]:
    """The four geometric variants without counting; used to carry a
    sidecar saliency map through the same transforms as its face."""
    return [
        img,
        flip_horizontal(img),
        rotate(img, ROTATION_DEGREES),
        rotate(img, -ROTATION_DEGREES),
    ]


def augment(img: Image) -> list[Image]:
    global call_count
    call_count += 1
    return aligned_variants(img)


def reset_call_count() -> None:
    global call_count
    call_count = 0
