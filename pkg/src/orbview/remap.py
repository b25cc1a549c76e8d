"""Remap tables: from a ball view to equirectangular or pinhole rasters.

A remap table stores, per output pixel, the real-valued source-pixel
coordinate to sample plus a validity flag. Building a table runs every
output ray through the ball projection once; resampling a video frame then
costs only one bilinear gather per pixel, which is the hot path the
compiled kernels cover.

Pixel conventions: integer source coordinates address pixel centers; the
normalized disk frame has x right / y up while raster rows grow downward,
so the disk-to-pixel map flips y. Output equirectangular images put
longitude -180..180 left to right and latitude +90..-90 top to bottom,
with the ray for (longitude, latitude) being
(cos(lat) sin(lon), sin(lat), cos(lat) cos(lon)) - the +z axis of the
projection looks out of the image center.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .projection import POLE_EPS, FovAlpha
from .raster import RasterImage
from .rotation import Rotation3, yaw_pitch_roll

TABLE_MAGIC = b"MBRT"
TABLE_VERSION = 1


@dataclass(frozen=True)
class BallCircle:
    """Ball silhouette in source-pixel coordinates (fractional allowed)."""

    cx: float
    cy: float
    r_px: float

    def __post_init__(self):
        if self.r_px <= 8.0:
            raise ValueError(f"silhouette radius must exceed 8 px, got {self.r_px}")

    def contains_point(self, x: float, y: float) -> bool:
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 <= self.r_px**2 + 1e-6

    def fits_inside(self, width: int, height: int) -> bool:
        return (
            self.cx - self.r_px >= -0.5
            and self.cy - self.r_px >= -0.5
            and self.cx + self.r_px <= width - 0.5
            and self.cy + self.r_px <= height - 0.5
        )


@dataclass(frozen=True)
class BallView:
    """One camera's capture of the ball plus everything needed to unwrap it."""

    image: RasterImage
    circle: BallCircle
    fov: FovAlpha
    orientation: Rotation3 = field(default_factory=Rotation3.identity)
    source_id: str = "default"

    def __post_init__(self):
        if not self.circle.fits_inside(self.image.width, self.image.height):
            raise ValueError(
                "ball circle does not fit inside the source image bounds"
            )


@dataclass(frozen=True)
class VirtualCamera:
    """Pinhole view from the sphere center: orientation plus field of view."""

    yaw_deg: float = 0.0
    pitch_deg: float = 0.0
    roll_deg: float = 0.0
    hfov_deg: float = 60.0
    out_width: int = 640
    out_height: int = 480

    def __post_init__(self):
        if not 0.0 < self.hfov_deg < 180.0:
            raise ValueError(f"hfov must be in (0, 180), got {self.hfov_deg}")
        if self.out_width < 1 or self.out_height < 1:
            raise ValueError("output dimensions must be positive")

    def rotation(self) -> Rotation3:
        """Camera-to-world rotation of the view."""
        return yaw_pitch_roll(self.yaw_deg, self.pitch_deg, self.roll_deg)


@dataclass(frozen=True)
class EquirectSpec:
    """Full-sphere equirectangular output; width = 2 x height covers it fully."""

    width: int = 1024
    height: int = 512

    def __post_init__(self):
        if self.width < 2 or self.height < 1:
            raise ValueError("output dimensions must be positive")


# An output projection is either a full panorama or a virtual pinhole view.
OutputSpec = EquirectSpec | VirtualCamera


@dataclass(frozen=True)
class RemapTable:
    """Per-output-pixel source coordinates and validity, immutable once built."""

    src_x: np.ndarray  # (h, w) float32
    src_y: np.ndarray  # (h, w) float32
    valid: np.ndarray  # (h, w) bool

    def __post_init__(self):
        sx = np.ascontiguousarray(self.src_x, dtype=np.float32)
        sy = np.ascontiguousarray(self.src_y, dtype=np.float32)
        va = np.ascontiguousarray(self.valid, dtype=bool)
        if not (sx.shape == sy.shape == va.shape) or sx.ndim != 2:
            raise ValueError("table planes must share one 2-D shape")
        for arr in (sx, sy, va):
            arr.setflags(write=False)
        object.__setattr__(self, "src_x", sx)
        object.__setattr__(self, "src_y", sy)
        object.__setattr__(self, "valid", va)

    @property
    def height(self) -> int:
        return self.src_x.shape[0]

    @property
    def width(self) -> int:
        return self.src_x.shape[1]

    def valid_fraction(self) -> float:
        return float(self.valid.mean())

    # Binary layout: magic "MBRT", u16 version, u32 width, u32 height, then
    # width*height little-endian records of (f32 src_x, f32 src_y, u8 valid).
    def to_bytes(self) -> bytes:
        header = TABLE_MAGIC + struct.pack(
            "<HII", TABLE_VERSION, self.width, self.height
        )
        records = np.empty(
            (self.height, self.width),
            dtype=np.dtype([("x", "<f4"), ("y", "<f4"), ("v", "u1")]),
        )
        records["x"] = self.src_x
        records["y"] = self.src_y
        records["v"] = self.valid
        return header + records.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "RemapTable":
        if blob[:4] != TABLE_MAGIC:
            raise ValueError("not a remap table (bad magic)")
        version, width, height = struct.unpack_from("<HII", blob, 4)
        if version != TABLE_VERSION:
            raise ValueError(f"unsupported remap table version {version}")
        body = np.frombuffer(
            blob,
            dtype=np.dtype([("x", "<f4"), ("y", "<f4"), ("v", "u1")]),
            count=width * height,
            offset=14,
        ).reshape(height, width)
        return cls(body["x"].copy(), body["y"].copy(), body["v"].astype(bool))

    def save(self, path) -> None:
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "RemapTable":
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())


def disk_to_pixels(ix, iy, circle: BallCircle):
    """Normalized disk coordinates to source-pixel coordinates (y flipped)."""
    return circle.cx + np.asarray(ix) * circle.r_px, circle.cy - np.asarray(iy) * circle.r_px


def equirect_rays(out_w: int, out_h: int) -> np.ndarray:
    """World rays for every pixel center of an equirectangular grid, (h, w, 3)."""
    lon = np.radians(-180.0 + (np.arange(out_w) + 0.5) * (360.0 / out_w))
    lat = np.radians(90.0 - (np.arange(out_h) + 0.5) * (180.0 / out_h))
    cos_lat = np.cos(lat)[:, None]
    rays = np.empty((out_h, out_w, 3), dtype=np.float64)
    rays[..., 0] = cos_lat * np.sin(lon)[None, :]
    rays[..., 1] = np.sin(lat)[:, None]
    rays[..., 2] = cos_lat * np.cos(lon)[None, :]
    return rays


def pinhole_rays(cam: VirtualCamera) -> np.ndarray:
    """World rays for every pixel center of a pinhole view, (h, w, 3)."""
    f = (cam.out_width / 2.0) / math.tan(math.radians(cam.hfov_deg) / 2.0)
    xs = (np.arange(cam.out_width) + 0.5 - cam.out_width / 2.0) / f
    ys = (cam.out_height / 2.0 - (np.arange(cam.out_height) + 0.5)) / f
    d = np.empty((cam.out_height, cam.out_width, 3), dtype=np.float64)
    d[..., 0] = xs[None, :]
    d[..., 1] = ys[:, None]
    d[..., 2] = 1.0
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    return cam.rotation().apply(d)


def _table_from_rays(view: BallView, world_rays: np.ndarray) -> RemapTable:
    h, w, _ = world_rays.shape
    cam_rays = np.ascontiguousarray(
        view.orientation.apply(world_rays).reshape(-1, 3)
    )
    src_x, src_y, valid = _kernels.project_to_source(
        cam_rays,
        view.fov.quarter_sin,
        view.fov.cos_half,
        POLE_EPS,
        view.circle.cx,
        view.circle.cy,
        view.circle.r_px,
    )
    return RemapTable(
        src_x.reshape(h, w), src_y.reshape(h, w), valid.reshape(h, w).astype(bool)
    )


def build_equirect_table(view: BallView, out_w: int, out_h: int) -> RemapTable:
    """Lookup table for a full equirectangular unwrap of one ball view.

    Pixels whose ray falls in the view's blind cone are marked invalid and
    later render as the black disk around the pole.
    """
    return _table_from_rays(view, equirect_rays(out_w, out_h))


def build_pinhole_table(view: BallView, cam: VirtualCamera) -> RemapTable:
    """Lookup table for a virtual pinhole view out of one ball view."""
    return _table_from_rays(view, pinhole_rays(cam))


def output_rays(spec: OutputSpec) -> np.ndarray:
    """World rays for every pixel center of an output projection."""
    if isinstance(spec, EquirectSpec):
        return equirect_rays(spec.width, spec.height)
    return pinhole_rays(spec)


def build_table(view: BallView, spec: OutputSpec) -> RemapTable:
    """Lookup table for any output projection of one ball view."""
    return _table_from_rays(view, output_rays(spec))


def resample(
    src: RasterImage, table: RemapTable, fill=None
) -> RasterImage:
    """Resample a source frame through a remap table with bilinear filtering.

    fill is the sample written at invalid table entries; it defaults to
    black and must match the source channel count.
    """
    if fill is None:
        fill_arr = np.zeros(src.channels, dtype=src.data.dtype)
    else:
        fill_arr = np.atleast_1d(np.asarray(fill, dtype=src.data.dtype))
        if fill_arr.shape != (src.channels,):
            raise ValueError(
                f"fill has {fill_arr.size} channel(s), source has {src.channels}"
            )
    out = _kernels.resample_bilinear(
        src.data,
        table.src_x,
        table.src_y,
        np.ascontiguousarray(table.valid).view(np.uint8),
        np.ascontiguousarray(fill_arr),
    )
    return RasterImage(out)
