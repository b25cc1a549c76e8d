"""In-memory raster images: row-major numpy arrays with 1 or 3 channels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SUPPORTED_DTYPES = (np.uint8, np.uint16)


@dataclass(frozen=True)
class RasterImage:
    """Image buffer of shape (height, width, channels), uint8 or uint16.

    One channel for gray/thermal data, three for color. The array is stored
    as given; treat it as immutable once wrapped.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(
                f"image must be (h, w, 1) or (h, w, 3), got shape {arr.shape}"
            )
        if arr.dtype not in (np.uint8, np.uint16):
            raise ValueError(f"unsupported sample dtype {arr.dtype}")
        object.__setattr__(self, "data", np.ascontiguousarray(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def bytes_per_sample(self) -> int:
        return self.data.dtype.itemsize

    @classmethod
    def full(cls, height, width, channels, value, dtype=np.uint8) -> "RasterImage":
        arr = np.full((height, width, channels), 0, dtype=dtype)
        arr[:] = np.asarray(value, dtype=dtype)
        return cls(arr)

    @classmethod
    def zeros(cls, height, width, channels, dtype=np.uint8) -> "RasterImage":
        return cls(np.zeros((height, width, channels), dtype=dtype))


def as_rgb8(image: RasterImage) -> RasterImage:
    """Display conversion to 3-channel uint8.

    16-bit samples are scaled by 1/257 (the exact 65535 -> 255 ratio) with
    round-half-up; single-channel data is replicated across RGB.
    """
    arr = image.data
    if arr.dtype == np.uint16:
        arr = np.floor(arr.astype(np.float64) / 257.0 + 0.5).astype(np.uint8)
    if arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    return RasterImage(arr)
