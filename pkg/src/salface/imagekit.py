"""Image type, binary PGM/PPM codec, and deterministic geometry primitives.

An :class:`Image` stores planar channel-major float64 data in ``[0, 1]``:
``data[c, y, x]``. Grayscale images have one channel plane, RGB images
three. All operations are pure functions returning new images, and every
output is clamped back into ``[0, 1]``.

Conventions fixed here so results are reproducible across platforms:

* bilinear resampling is corner-aligned (source corners map to output
  corners; a 1-pixel output axis samples the source center),
* reads outside an image clamp to the nearest edge pixel,
* writing quantizes with round-half-away-from-zero to /255 levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DecodeError, ShapeError

__all__ = [
    "Image",
    "load_pnm",
    "save_pnm",
    "resize_bilinear",
    "crop_with_edge_pad",
    "flip_horizontal",
    "rotate",
    "to_grayscale",
]

GRAY_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True, eq=False)
class Image:
    """Planar raster: ``data`` has shape (channels, height, width)."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[0] not in (1, 3):
            raise ShapeError(f"image data must be (1|3, h, w), got shape {d.shape}")
        if d.shape[1] < 1 or d.shape[2] < 1:
            raise ShapeError(f"image dimensions must be >= 1, got shape {d.shape}")
        if d.dtype != np.float64:
            object.__setattr__(self, "data", d.astype(np.float64))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Image":
        """Build an image from a (c, h, w) or (h, w) array, clipping to [0, 1]."""
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim == 2:
            a = a[None, :, :]
        return cls(np.clip(a, 0.0, 1.0))

    def plane(self, c: int = 0) -> np.ndarray:
        """One channel as a (h, w) array (a view, do not mutate)."""
        return self.data[c]


def _clip(arr: np.ndarray) -> np.ndarray:
    return np.clip(arr, 0.0, 1.0)


# ---------------------------------------------------------------------------
# PNM codec (binary P5 / P6, maxval 255)
# ---------------------------------------------------------------------------

_WHITESPACE = b" \t\r\n\x0b\x0c"


def _next_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    """Next whitespace-delimited header token, skipping '#' comments."""
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c in _WHITESPACE:
            pos += 1
        elif c == b"#":
            while pos < n and buf[pos : pos + 1] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise DecodeError(f"truncated header at offset {pos}")
    start = pos
    while pos < n and buf[pos : pos + 1] not in _WHITESPACE and buf[pos : pos + 1] != b"#":
        pos += 1
    return buf[start:pos], pos


def _header_int(buf: bytes, pos: int, what: str) -> tuple[int, int]:
    token, end = _next_token(buf, pos)
    if not token.isdigit():
        raise DecodeError(f"bad {what} token {token!r} at offset {end - len(token)}")
    return int(token), end


def load_pnm(data: bytes) -> Image:
    """Decode a binary PGM (P5, gray) or PPM (P6, rgb) byte stream.

    Only maxval 255 is supported; pixel value v maps to v / 255.
    """
    magic, pos = _next_token(data, 0)
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise DecodeError(f"bad magic {magic!r} at offset 0 (expected P5 or P6)")
    width, pos = _header_int(data, pos, "width")
    height, pos = _header_int(data, pos, "height")
    maxval, pos = _header_int(data, pos, "maxval")
    if width < 1 or height < 1:
        raise DecodeError(f"zero dimension {width}x{height} in header (offset {pos})")
    if maxval != 255:
        raise DecodeError(f"unsupported maxval {maxval} at offset {pos} (only 255)")
    # exactly one whitespace byte separates the header from the payload
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise DecodeError(f"missing payload separator at offset {pos}")
    pos += 1
    expected = width * height * channels
    payload = data[pos:]
    if len(payload) < expected:
        raise DecodeError(
            f"truncated payload at offset {pos + len(payload)}: "
            f"expected {expected} bytes, got {len(payload)}"
        )
    if len(payload) > expected:
        raise DecodeError(f"trailing data after payload at offset {pos + expected}")
    raw = np.frombuffer(payload, dtype=np.uint8).astype(np.float64) / 255.0
    # interleaved rows -> planar channel-major
    planes = raw.reshape(height, width, channels).transpose(2, 0, 1)
    return Image(np.ascontiguousarray(planes))


def save_pnm(img: Image) -> bytes:
    """Encode as binary P5 (1 channel) or P6 (3 channels), maxval 255.

    Values quantize by round-half-away-from-zero to the nearest /255 level,
    so images already on that grid round-trip bit-exactly.
    """
    magic = b"P5" if img.channels == 1 else b"P6"
    header = magic + b"\n" + f"{img.width} {img.height}\n255\n".encode("ascii")
    levels = np.floor(img.data * 255.0 + 0.5)  # values are non-negative
    interleaved = levels.astype(np.uint8).transpose(1, 2, 0)
    return header + interleaved.tobytes()


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------


def _sample_bilinear(data: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample planes at float coordinate grids with edge clamping.

    ``xs`` and ``ys`` are broadcast-compatible (h_out, w_out) coordinate
    arrays in source pixel units.
    """
    h, w = data.shape[1], data.shape[2]
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    top = data[:, y0, x0] * (1.0 - fx) + data[:, y0, x1] * fx
    bot = data[:, y1, x0] * (1.0 - fx) + data[:, y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def _axis_coords(dst: int, src: int) -> np.ndarray:
    if dst == 1:
        return np.full(1, (src - 1) / 2.0)
    return np.arange(dst, dtype=np.float64) * ((src - 1) / (dst - 1))


def resize_bilinear(img: Image, out_w: int, out_h: int) -> Image:
    """Corner-aligned bilinear resize to (out_w, out_h)."""
    if out_w < 1 or out_h < 1:
        raise ShapeError(f"output size must be >= 1, got {out_w}x{out_h}")
    xs = _axis_coords(out_w, img.width)[None, :]
    ys = _axis_coords(out_h, img.height)[:, None]
    xs, ys = np.broadcast_arrays(xs, ys)
    return Image(_clip(_sample_bilinear(img.data, xs, ys)))


def crop_with_edge_pad(img: Image, box) -> Image:
    """Crop to ``box``; pixels outside the source replicate the nearest edge.

    ``box`` is any object with integer x, y, w, h attributes; it may extend
    outside (even lie entirely outside) the image.
    """
    xs = np.clip(np.arange(box.x, box.x + box.w), 0, img.width - 1)
    ys = np.clip(np.arange(box.y, box.y + box.h), 0, img.height - 1)
    return Image(np.ascontiguousarray(img.data[:, ys[:, None], xs[None, :]]))


def flip_horizontal(img: Image) -> Image:
    """Mirror columns (an involution)."""
    return Image(np.ascontiguousarray(img.data[:, :, ::-1]))


def rotate(img: Image, degrees: float) -> Image:
    """Rotate about the image center by ``degrees`` (|degrees| <= 45).

    Positive angles turn content counter-clockwise on screen. Sampling is
    bilinear; reads past the border clamp to the nearest edge pixel, the
    same padding rule as :func:`crop_with_edge_pad`. Output size is
    unchanged.
    """
    if abs(degrees) > 45.0:
        raise ShapeError(f"rotation limited to +-45 degrees, got {degrees}")
    if degrees == 0.0:
        return Image(img.data.copy())
    theta = np.deg2rad(degrees)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    cx = (img.width - 1) / 2.0
    cy = (img.height - 1) / 2.0
    dx = np.arange(img.width, dtype=np.float64)[None, :] - cx
    dy = np.arange(img.height, dtype=np.float64)[:, None] - cy
    # inverse mapping: output pixel pulls from the source location that
    # lands on it under the forward rotation (y axis points down)
    src_x = cos_t * dx - sin_t * dy + cx
    src_y = sin_t * dx + cos_t * dy + cy
    return Image(_clip(_sample_bilinear(img.data, src_x, src_y)))


def to_grayscale(img: Image) -> Image:
    """Collapse RGB to one luma plane (0.299 R + 0.587 G + 0.114 B)."""
    if img.channels == 1:
        return Image(img.data.copy())
    r, g, b = GRAY_WEIGHTS
    luma = r * img.data[0] + g * img.data[1] + b * img.data[2]
    return Image(_clip(luma)[None, :, :])
