"""Backend dispatch for the hot kernels.

The compiled extension is preferred when importable; otherwise the NumPy
implementation is used. Override with SALFACE_KERNELS=numpy|compiled or
:func:`set_backend` (mainly for the benchmark and parity tests).
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import ConfigError
from . import _numpy_ops

try:
    from . import _kernels
except ImportError:
    _kernels = None

_BACKENDS = {"numpy": _numpy_ops}
if _kernels is not None:
    _BACKENDS["compiled"] = _kernels


def _initial_backend() -> str:
    requested = os.environ.get("SALFACE_KERNELS", "auto")
    if requested == "auto":
        return "compiled" if _kernels is not None else "numpy"
    if requested not in _BACKENDS:
        raise ConfigError(
            f"SALFACE_KERNELS={requested!r} unavailable (have: {sorted(_BACKENDS)})"
        )
    return requested


_active = _initial_backend()


def active_backend() -> str:
    return _active


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ConfigError(f"unknown backend {name!r} (have: {sorted(_BACKENDS)})")
    _active = name


def _contig(arr):
    return np.ascontiguousarray(arr)


def conv2d_forward(x, w, b, stride=1):
    """Valid (unpadded) cross-correlation: (n,ci,h,w) * (co,ci,kh,kw) -> (n,co,ho,wo)."""
    return _BACKENDS[_active].conv2d_forward(_contig(x), _contig(w), _contig(b), stride)


def conv2d_backward(x, w, dout, stride=1):
    """Gradients (dx, dw, db) of conv2d_forward."""
    return _BACKENDS[_active].conv2d_backward(
        _contig(x), _contig(w), _contig(dout), stride
    )


def maxpool_forward(x, kernel, stride):
    """Max pooling; returns (out, argmax) with argmax flat into each (h,w) plane."""
    return _BACKENDS[_active].maxpool_forward(_contig(x), kernel, stride)


def maxpool_backward(dout, argmax, h, w):
    """Scatter pooled gradients back to the argmax source positions."""
    return _BACKENDS[_active].maxpool_backward(_contig(dout), _contig(argmax), h, w)
