# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lane for the per-pixel remap kernels.

Same contracts and same arithmetic as _remap_np; see there for semantics.
"""

from libc.math cimport sqrt, floor
from libc.stdint cimport uint8_t, uint16_t, int64_t

import numpy as np


ctypedef fused sample_t:
    uint8_t
    uint16_t


def project_to_source(
    const double[:, ::1] rays,
    double sin_quarter,
    double cos_half,
    double pole_eps,
    double cx,
    double cy,
    double r_px,
):
    cdef Py_ssize_t n = rays.shape[0]
    src_x_arr = np.zeros(n, dtype=np.float32)
    src_y_arr = np.zeros(n, dtype=np.float32)
    valid_arr = np.zeros(n, dtype=np.uint8)
    cdef float[::1] src_x = src_x_arr
    cdef float[::1] src_y = src_y_arr
    cdef uint8_t[::1] valid = valid_arr
    cdef Py_ssize_t i
    cdef double rx, ry, rz, denom
    with nogil:
        for i in range(n):
            rx = rays[i, 0]
            ry = rays[i, 1]
            rz = rays[i, 2]
            if rz >= cos_half and rz + 1.0 >= pole_eps:
                denom = sqrt(2.0 * (rz + 1.0)) * sin_quarter
                src_x[i] = <float> (cx + (rx / denom) * r_px)
                src_y[i] = <float> (cy - (ry / denom) * r_px)
                valid[i] = 1
    return src_x_arr, src_y_arr, valid_arr


def resample_bilinear(
    const sample_t[:, :, ::1] src,
    const float[:, ::1] src_x,
    const float[:, ::1] src_y,
    const uint8_t[:, ::1] valid,
    const sample_t[::1] fill,
):
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    cdef Py_ssize_t ch = src.shape[2]
    cdef Py_ssize_t oh = src_x.shape[0]
    cdef Py_ssize_t ow = src_x.shape[1]
    if sample_t is uint8_t:
        out_arr = np.empty((oh, ow, ch), dtype=np.uint8)
    else:
        out_arr = np.empty((oh, ow, ch), dtype=np.uint16)
    cdef sample_t[:, :, ::1] out = out_arr
    cdef Py_ssize_t y, x, c
    cdef int64_t x0, y0, x1, y1
    cdef double sx, sy, fx, fy, wx0, wx1, wy0, wy1, acc
    with nogil:
        for y in range(oh):
            for x in range(ow):
                if not valid[y, x]:
                    for c in range(ch):
                        out[y, x, c] = fill[c]
                    continue
                sx = <double> src_x[y, x]
                sy = <double> src_y[y, x]
                fx = sx - floor(sx)
                fy = sy - floor(sy)
                x0 = <int64_t> floor(sx)
                y0 = <int64_t> floor(sy)
                x1 = x0 + 1
                y1 = y0 + 1
                if x0 < 0:
                    x0 = 0
                elif x0 > w - 1:
                    x0 = w - 1
                if y0 < 0:
                    y0 = 0
                elif y0 > h - 1:
                    y0 = h - 1
                if x1 < 0:
                    x1 = 0
                elif x1 > w - 1:
                    x1 = w - 1
                if y1 < 0:
                    y1 = 0
                elif y1 > h - 1:
                    y1 = h - 1
                wx1 = fx
                wx0 = 1.0 - fx
                wy1 = fy
                wy0 = 1.0 - fy
                for c in range(ch):
                    acc = ((<double> src[y0, x0, c]) * wx0
                           + (<double> src[y0, x1, c]) * wx1) * wy0 \
                        + ((<double> src[y1, x0, c]) * wx0
                           + (<double> src[y1, x1, c]) * wx1) * wy1
                    out[y, x, c] = <sample_t> floor(acc + 0.5)
    return out_arr
