"""Built-in synthetic face-stand-in datasets.

Every experiment in the test suite runs on generated data, so nothing
here needs an external corpus. Three task families:

* ``shapes_task`` - cleanly separable: one of three high-contrast shapes
  (disk, horizontal bar, vertical bar) on mild noise; the ground-truth
  saliency mask covers the shape. Subjects differ in background tone and
  shape placement.
* ``context_task`` - built to probe the reweight ratio. The visually
  salient object is a bright central blob whose interior carries only
  per-image clutter; the class cue is a bar pattern in the periphery,
  outside the blob, drawn into strong background noise. Suppressing the
  periphery (high alpha) removes the noise and the generalizing cue at
  once: training gets easier, held-out accuracy collapses.
* ``disk_task`` - two classes, disk somewhere vs none, light noise; the
  disk center and radius ride along for localization checks.

``write_dataset`` materializes a list of samples as PPM images with
``.sal.pgm`` mask sidecars plus a manifest CSV (paths relative to the
manifest).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..imagekit import Image, save_pnm
from ..saliency import gaussian_blur, map_to_image

__all__ = ["SyntheticSample", "shapes_task", "context_task", "disk_task", "write_dataset"]


@dataclass
class SyntheticSample:
    image: Image
    mask: np.ndarray  # ground-truth saliency in [0, 1]
    label: int
    subject_id: str
    task: str
    shape_center: tuple[int, int] | None = None  # (row, col)
    shape_radius: int = 0


def _grid(size: int):
    return np.mgrid[0:size, 0:size].astype(np.float64)


def _disk(size: int, cy: float, cx: float, radius: float) -> np.ndarray:
    yy, xx = _grid(size)
    return ((yy - cy) ** 2 + (xx - cx) ** 2 <= radius**2).astype(np.float64)


def _bar(size: int, cy: float, cx: float, half_len: float, half_width: float,
         vertical: bool) -> np.ndarray:
    yy, xx = _grid(size)
    if vertical:
        hit = (np.abs(xx - cx) <= half_width) & (np.abs(yy - cy) <= half_len)
    else:
        hit = (np.abs(yy - cy) <= half_width) & (np.abs(xx - cx) <= half_len)
    return hit.astype(np.float64)


def _to_rgb(base: np.ndarray) -> Image:
    return Image.from_array(np.stack([base, base, base]))


def shapes_task(
    n_subjects: int,
    per_subject: int,
    size: int = 64,
    num_classes: int = 3,
    seed: int = 0,
    noise: float = 0.10,
    contrast: float = 0.45,
) -> list[SyntheticSample]:
    """Separable shape classification; subject i carries class i % K."""
    rng = np.random.default_rng(seed)
    radius = size / 6.5
    samples = []
    for s in range(n_subjects):
        label = s % num_classes
        tone = 0.30 + 0.15 * rng.random()
        bias_y = rng.uniform(-size / 10, size / 10)
        bias_x = rng.uniform(-size / 10, size / 10)
        for _ in range(per_subject):
            cy = size / 2 + bias_y + rng.uniform(-size / 16, size / 16)
            cx = size / 2 + bias_x + rng.uniform(-size / 16, size / 16)
            if label == 0:
                shape = _disk(size, cy, cx, radius)
            elif label == 1:
                shape = _bar(size, cy, cx, radius * 1.8, size / 14, vertical=False)
            else:
                shape = _bar(size, cy, cx, radius * 1.8, size / 14, vertical=True)
            base = tone + noise * rng.uniform(-1, 1, (size, size))
            base = base + contrast * shape
            mask = np.clip(gaussian_blur(shape), 0.0, 1.0)
            samples.append(
                SyntheticSample(
                    image=_to_rgb(base),
                    mask=mask,
                    label=label,
                    subject_id=f"s{s:04d}",
                    task="gender" if num_classes == 2 else "expression",
                    shape_center=(int(round(cy)), int(round(cx))),
                    shape_radius=int(round(radius)),
                )
            )
    return samples


def context_task(
    n_subjects: int,
    per_subject: int,
    size: int = 32,
    seed: int = 0,
    noise: float = 0.30,
    anchor_radius: float | None = None,
    anchor_contrast: float = 0.25,
    clutter: float = 0.35,
    cue_contrast: float = 0.30,
) -> list[SyntheticSample]:
    """Three classes cued by peripheral bar orientation; mask marks the blob.

    The mask covers only the central anchor blob, so a high reweight
    ratio keeps the (class-free, cluttered) blob and attenuates both the
    background noise and the discriminative periphery.
    """
    rng = np.random.default_rng(seed)
    if anchor_radius is None:
        anchor_radius = size / 4.5
    num_classes = 3
    center = (size - 1) / 2.0
    anchor = _disk(size, center, center, anchor_radius)
    yy, xx = _grid(size)
    ring = (((yy - center) ** 2 + (xx - center) ** 2) > (anchor_radius + 1.5) ** 2).astype(
        np.float64
    )
    bar_w = max(1.0, size / 20)
    cues = [
        ring * (np.abs(yy - center) <= bar_w),  # horizontal bar
        ring * (np.abs(xx - center) <= bar_w),  # vertical bar
        ring * ((np.abs((yy - center) - (xx - center)) <= bar_w)
                | (np.abs((yy - center) + (xx - center)) <= bar_w)),  # diagonals
    ]
    mask = np.clip(gaussian_blur(anchor), 0.0, 1.0)
    samples = []
    for s in range(n_subjects):
        label = s % num_classes
        tone = 0.40 + 0.10 * rng.random()
        for _ in range(per_subject):
            base = tone + noise * rng.uniform(-1, 1, (size, size))
            base = base + anchor_contrast * anchor
            base = base + clutter * rng.uniform(-1, 1, (size, size)) * anchor
            base = base + cue_contrast * cues[label]
            samples.append(
                SyntheticSample(
                    image=_to_rgb(base),
                    mask=mask,
                    label=label,
                    subject_id=f"s{s:04d}",
                    task="expression",
                    shape_center=(int(center), int(center)),
                    shape_radius=int(round(anchor_radius)),
                )
            )
    return samples


def disk_task(
    n_subjects: int,
    per_subject: int,
    size: int = 32,
    seed: int = 0,
    noise: float = 0.08,
    contrast: float = 0.45,
) -> list[SyntheticSample]:
    """Disk present (class 1) or absent (class 0); center recorded."""
    rng = np.random.default_rng(seed)
    radius = max(4.0, size / 6.0)
    margin = radius + 2
    samples = []
    for s in range(n_subjects):
        label = s % 2
        tone = 0.35 + 0.10 * rng.random()
        for _ in range(per_subject):
            base = tone + noise * rng.uniform(-1, 1, (size, size))
            center_rc = None
            mask = np.zeros((size, size))
            if label == 1:
                cy = rng.uniform(margin, size - margin)
                cx = rng.uniform(margin, size - margin)
                disk = _disk(size, cy, cx, radius)
                base = base + contrast * disk
                mask = np.clip(gaussian_blur(disk), 0.0, 1.0)
                center_rc = (int(round(cy)), int(round(cx)))
            samples.append(
                SyntheticSample(
                    image=_to_rgb(base),
                    mask=mask,
                    label=label,
                    subject_id=f"s{s:04d}",
                    task="gender",
                    shape_center=center_rc,
                    shape_radius=int(round(radius)),
                )
            )
    return samples


def write_dataset(samples: list[SyntheticSample], out_dir) -> Path:
    """Write PPM images, .sal.pgm mask sidecars, and manifest.csv."""
    out_dir = Path(out_dir)
    images_dir = out_dir / "images"
    images_dir.mkdir(parents=True, exist_ok=True)
    lines = ["path,x,y,w,h,subject_id,label,task"]
    for i, sample in enumerate(samples):
        name = f"img_{i:05d}.ppm"
        (images_dir / name).write_bytes(save_pnm(sample.image))
        map_name = f"img_{i:05d}.sal.pgm"
        (images_dir / map_name).write_bytes(save_pnm(map_to_image(sample.mask)))
        w = sample.image.width
        h = sample.image.height
        lines.append(
            f"images/{name},0,0,{w},{h},{sample.subject_id},{sample.label},{sample.task}"
        )
    manifest = out_dir / "manifest.csv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest
