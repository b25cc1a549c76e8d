"""Pure-numpy lane for the per-pixel remap kernels.

Mirrors the compiled lane in _remap_cy bit for bit: identical arithmetic,
identical term ordering, identical round-half-up on output samples. Used as
the fallback when the extension is unavailable and as the reference in the
lane-parity tests.
"""

from __future__ import annotations

import numpy as np


def project_to_source(
    rays: np.ndarray,
    sin_quarter: float,
    cos_half: float,
    pole_eps: float,
    cx: float,
    cy: float,
    r_px: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Project unit rays (n, 3) onto source-pixel coordinates of a ball disk.

    Fuses the stretched disk projection with the disk-to-pixel affine map
    (x right, y flipped into raster rows). Returns (src_x, src_y, valid) as
    (float32, float32, uint8) arrays of length n; invalid entries are zero.
    """
    rays = np.asarray(rays, dtype=np.float64)
    rx, ry, rz = rays[:, 0], rays[:, 1], rays[:, 2]
    valid = (rz >= cos_half) & (rz + 1.0 >= pole_eps)
    denom = np.sqrt(2.0 * np.where(valid, rz + 1.0, 1.0)) * sin_quarter
    ix = np.where(valid, rx / denom, 0.0)
    iy = np.where(valid, ry / denom, 0.0)
    src_x = np.where(valid, cx + ix * r_px, 0.0).astype(np.float32)
    src_y = np.where(valid, cy - iy * r_px, 0.0).astype(np.float32)
    return src_x, src_y, valid.astype(np.uint8)


def resample_bilinear(
    src: np.ndarray,
    src_x: np.ndarray,
    src_y: np.ndarray,
    valid: np.ndarray,
    fill: np.ndarray,
) -> np.ndarray:
    """Bilinear gather of src (h, w, c) at float32 coordinate maps (oh, ow).

    Integer coordinates address pixel centers. Neighbor indices clamp to the
    image border; weights accumulate in float64 and round half-up into the
    source dtype. Invalid map entries take the fill sample.
    """
    h, w, _ = src.shape
    sx = src_x.astype(np.float64)
    sy = src_y.astype(np.float64)

    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = sx - x0
    fy = sy - y0

    x0r = x0.astype(np.int64)
    y0r = y0.astype(np.int64)
    x0i = np.clip(x0r, 0, w - 1)
    y0i = np.clip(y0r, 0, h - 1)
    x1i = np.clip(x0r + 1, 0, w - 1)
    y1i = np.clip(y0r + 1, 0, h - 1)

    p00 = src[y0i, x0i].astype(np.float64)
    p01 = src[y0i, x1i].astype(np.float64)
    p10 = src[y1i, x0i].astype(np.float64)
    p11 = src[y1i, x1i].astype(np.float64)

    wx1 = fx[..., None]
    wx0 = 1.0 - wx1
    wy1 = fy[..., None]
    wy0 = 1.0 - wy1

    acc = (p00 * wx0 + p01 * wx1) * wy0 + (p10 * wx0 + p11 * wx1) * wy1
    out = np.floor(acc + 0.5).astype(src.dtype)
    mask = valid.astype(bool)
    out[~mask] = fill
    return out
