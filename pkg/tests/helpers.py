"""Test-side measurement utilities shared across suites."""

import numpy as np


def scanline_crossings(values: np.ndarray, threshold: float) -> np.ndarray:
    """Subpixel positions where a 1-D signal crosses a threshold."""
    s = values.astype(np.float64) - threshold
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    return idx + s[idx] / (s[idx] - s[idx + 1])


def edge_alignment_offsets(
    img_a: np.ndarray,
    img_b: np.ndarray,
    ok: np.ndarray,
    threshold: float,
    step: int = 7,
    match_window: float = 40.0,
    margin: int = 3,
) -> np.ndarray:
    """Offsets between matched edge crossings of two layers, in pixels.

    Scans rows and columns of the first channel inside the ok mask and
    pairs each crossing in A with the nearest one in B. Only crossings
    whose edge runs mostly transverse to the scan direction count (a
    nearly parallel edge has no well-defined crossing position).
    Unmatched crossings contribute match_window, so real misalignment
    cannot hide by dropping edges.
    """
    a = img_a[..., 0].astype(np.float64)
    b = img_b[..., 0].astype(np.float64)
    gy_a, gx_a = np.gradient(a)
    offsets = []

    def scan(a1, b1, ok1, along, across):
        ca = scanline_crossings(a1, threshold)
        cb = scanline_crossings(b1, threshold)
        for k, pos in enumerate(ca):
            i = int(round(pos))
            lo = int(np.floor(pos)) - margin
            hi = int(np.ceil(pos)) + margin
            if lo < 0 or hi >= ok1.size or not ok1[lo : hi + 1].all():
                continue
            if abs(along[i]) < 2.0 * abs(across[i]):
                continue  # edge too parallel to the scan direction
            others = np.delete(ca, k)
            if others.size and np.abs(others - pos).min() < 6.0:
                continue  # edge weaving along the scanline, position ill-posed
            if cb.size == 0:
                offsets.append(match_window)
                continue
            offsets.append(min(np.abs(cb - pos).min(), match_window))

    for y in range(margin, a.shape[0] - margin, step):
        scan(a[y], b[y], ok[y], gx_a[y], gy_a[y])
    for x in range(margin, a.shape[1] - margin, step):
        scan(a[:, x], b[:, x], ok[:, x], gy_a[:, x], gx_a[:, x])
    return np.asarray(offsets)


def equirect_latitude_band(w: int, h: int, max_abs_lat_deg: float) -> np.ndarray:
    """Mask of equirect pixels within +-max_abs_lat_deg of the equator.

    Checker cells collapse into sub-pixel slivers near the parametrization
    poles; edge metrics only make sense where the pattern resolves.
    """
    lat = 90.0 - (np.arange(h) + 0.5) * (180.0 / h)
    rows = np.abs(lat) <= max_abs_lat_deg
    return np.broadcast_to(rows[:, None], (h, w)).copy()
