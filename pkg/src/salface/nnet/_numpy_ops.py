"""NumPy implementations of the convolution and pooling kernels.

This is the fallback backend used when the compiled extension is not
available. Shapes follow the layer code: activations are (n, c, h, w),
conv weights (out_c, in_c, kh, kw), pooling argmax indices are flat
offsets into each (h, w) plane.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv2d_forward(x, w, b, stride):
    n, _, _, _ = x.shape
    out_c, _, kh, kw = w.shape
    windows = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    # (n, ho, wo, out_c) <- contract in_c and the kernel window
    out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3]))
    out = np.ascontiguousarray(out.transpose(0, 3, 1, 2))
    out += b[None, :, None, None]
    return out


def conv2d_backward(x, w, dout, stride):
    out_c, in_c, kh, kw = w.shape
    _, _, ho, wo = dout.shape
    dx = np.zeros_like(x)
    dw = np.zeros_like(w)
    db = dout.sum(axis=(0, 2, 3))
    for p in range(kh):
        for q in range(kw):
            xs = x[:, :, p : p + ho * stride : stride, q : q + wo * stride : stride]
            dw[:, :, p, q] = np.tensordot(dout, xs, axes=([0, 2, 3], [0, 2, 3]))
            patch = np.tensordot(dout, w[:, :, p, q], axes=([1], [0]))
            dx[:, :, p : p + ho * stride : stride, q : q + wo * stride : stride] += (
                patch.transpose(0, 3, 1, 2)
            )
    return dx, dw, db


def maxpool_forward(x, kernel, stride):
    n, c, h, w = x.shape
    windows = sliding_window_view(x, (kernel, kernel), axis=(2, 3))[:, :, ::stride, ::stride]
    n_, c_, ho, wo = windows.shape[:4]
    flat = windows.reshape(n_, c_, ho, wo, kernel * kernel)
    local = flat.argmax(axis=4)
    out = np.take_along_axis(flat, local[..., None], axis=4)[..., 0]
    hos = np.arange(ho)[:, None] * stride
    wos = np.arange(wo)[None, :] * stride
    rows = hos + local // kernel
    cols = wos + local % kernel
    argmax = (rows * w + cols).astype(np.int64)
    return np.ascontiguousarray(out), argmax


def maxpool_backward(dout, argmax, h, w):
    n, c, ho, wo = dout.shape
    dx = np.zeros((n, c, h * w), dtype=dout.dtype)
    flat_idx = argmax.reshape(n, c, ho * wo)
    np.add.at(
        dx,
        (np.arange(n)[:, None, None], np.arange(c)[None, :, None], flat_idx),
        dout.reshape(n, c, ho * wo),
    )
    return dx.reshape(n, c, h, w)
