# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled convolution and pooling kernels.

Single-threaded on purpose: accumulation order is fixed, so results are
reproducible run to run. Mirrors the signatures of _numpy_ops.
"""

import numpy as np

cimport cython

ctypedef fused real:
    float
    double


def conv2d_forward(real[:, :, :, ::1] x, real[:, :, :, ::1] w, real[::1] b, int stride):
    cdef Py_ssize_t n = x.shape[0], in_c = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t out_c = w.shape[0], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t ho = (h - kh) // stride + 1
    cdef Py_ssize_t wo = (wd - kw) // stride + 1
    if real is float:
        out_arr = np.empty((n, out_c, ho, wo), dtype=np.float32)
    else:
        out_arr = np.empty((n, out_c, ho, wo), dtype=np.float64)
    cdef real[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t i, o, c, p, q, r, s
    cdef real wv, acc
    with nogil:
        for i in range(n):
            for o in range(out_c):
                for r in range(ho):
                    for s in range(wo):
                        out[i, o, r, s] = b[o]
                for c in range(in_c):
                    for p in range(kh):
                        for q in range(kw):
                            wv = w[o, c, p, q]
                            for r in range(ho):
                                for s in range(wo):
                                    out[i, o, r, s] = out[i, o, r, s] + wv * x[i, c, r * stride + p, s * stride + q]
    return out_arr


def conv2d_backward(real[:, :, :, ::1] x, real[:, :, :, ::1] w, real[:, :, :, ::1] dout, int stride):
    cdef Py_ssize_t n = x.shape[0], in_c = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t out_c = w.shape[0], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t ho = dout.shape[2], wo = dout.shape[3]
    if real is float:
        dtype = np.float32
    else:
        dtype = np.float64
    dx_arr = np.zeros((n, in_c, h, wd), dtype=dtype)
    dw_arr = np.zeros((out_c, in_c, kh, kw), dtype=dtype)
    db_arr = np.zeros(out_c, dtype=dtype)
    cdef real[:, :, :, ::1] dx = dx_arr
    cdef real[:, :, :, ::1] dw = dw_arr
    cdef real[::1] db = db_arr
    cdef Py_ssize_t i, o, c, p, q, r, s
    cdef real g, wv, acc
    with nogil:
        for i in range(n):
            for o in range(out_c):
                for r in range(ho):
                    for s in range(wo):
                        g = dout[i, o, r, s]
                        db[o] += g
                for c in range(in_c):
                    for p in range(kh):
                        for q in range(kw):
                            wv = w[o, c, p, q]
                            acc = 0
                            for r in range(ho):
                                for s in range(wo):
                                    g = dout[i, o, r, s]
                                    acc += g * x[i, c, r * stride + p, s * stride + q]
                                    dx[i, c, r * stride + p, s * stride + q] += g * wv
                            dw[o, c, p, q] += acc
    return dx_arr, dw_arr, db_arr


def maxpool_forward(real[:, :, :, ::1] x, int kernel, int stride):
    cdef Py_ssize_t n = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3]
    cdef Py_ssize_t ho = (h - kernel) // stride + 1
    cdef Py_ssize_t wo = (w - kernel) // stride + 1
    if real is float:
        out_arr = np.empty((n, c, ho, wo), dtype=np.float32)
    else:
        out_arr = np.empty((n, c, ho, wo), dtype=np.float64)
    idx_arr = np.empty((n, c, ho, wo), dtype=np.int64)
    cdef real[:, :, :, ::1] out = out_arr
    cdef long long[:, :, :, ::1] idx = idx_arr
    cdef Py_ssize_t i, j, r, s, p, q, br, bc
    cdef real best, v
    with nogil:
        for i in range(n):
            for j in range(c):
                for r in range(ho):
                    for s in range(wo):
                        best = x[i, j, r * stride, s * stride]
                        br = r * stride
                        bc = s * stride
                        for p in range(kernel):
                            for q in range(kernel):
                                v = x[i, j, r * stride + p, s * stride + q]
                                if v > best:
                                    best = v
                                    br = r * stride + p
                                    bc = s * stride + q
                        out[i, j, r, s] = best
                        idx[i, j, r, s] = br * w + bc
    return out_arr, idx_arr


def maxpool_backward(real[:, :, :, ::1] dout, long long[:, :, :, ::1] argmax, int h, int w):
    cdef Py_ssize_t n = dout.shape[0], c = dout.shape[1], ho = dout.shape[2], wo = dout.shape[3]
    if real is float:
        dx_arr = np.zeros((n, c, h, w), dtype=np.float32)
    else:
        dx_arr = np.zeros((n, c, h, w), dtype=np.float64)
    cdef real[:, :, :, ::1] dx = dx_arr
    cdef Py_ssize_t i, j, r, s
    cdef long long flat
    with nogil:
        for i in range(n):
            for j in range(c):
                for r in range(ho):
                    for s in range(wo):
                        flat = argmax[i, j, r, s]
                        dx[i, j, flat // w, flat % w] += dout[i, j, r, s]
    return dx_arr
