"""Synthetic ground truth: ray-traced renders of a perfect mirror ball.

Everything geometric in the toolkit is checked against this module, so it
stays deliberately primitive: analytic sphere intersection, a single
mirror bounce, no shading, environments at infinity. Renders are chunked
by rows to keep peak memory flat at large resolutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .projection import reflect_array
from .raster import RasterImage
from .remap import BallCircle, EquirectSpec, OutputSpec, output_rays
from .rotation import Rotation3

BACKGROUND_RGB = (0.0, 255.0, 0.0)  # sentinel for off-ball pixels


class SyntheticEnvironment:
    """Deterministic color for any unit direction; subclasses implement sample."""

    def sample(self, dirs: np.ndarray) -> np.ndarray:
        """dirs (..., 3) unit -> colors (..., 3) float64 in [0, 255]."""
        raise NotImplementedError


@dataclass(frozen=True)
class CheckerEnvironment(SyntheticEnvironment):
    """Longitude/latitude checkerboard with square cells of cell_deg degrees."""

    cell_deg: float = 30.0
    bright: float = 230.0
    dark: float = 25.0

    def sample(self, dirs: np.ndarray) -> np.ndarray:
        dirs = np.asarray(dirs, dtype=np.float64)
        lon = np.degrees(np.arctan2(dirs[..., 0], dirs[..., 2]))
        lat = np.degrees(np.arcsin(np.clip(dirs[..., 1], -1.0, 1.0)))
        cells = np.floor((lon + 180.0) / self.cell_deg) + np.floor(
            (lat + 90.0) / self.cell_deg
        )
        value = np.where(cells % 2 == 0, self.bright, self.dark)
        return np.repeat(value[..., None], 3, axis=-1)


@dataclass(frozen=True)
class GradientEnvironment(SyntheticEnvironment):
    """Each axis drives one channel: rgb = 255 * (direction + 1) / 2."""

    def sample(self, dirs: np.ndarray) -> np.ndarray:
        dirs = np.asarray(dirs, dtype=np.float64)
        return (dirs + 1.0) * 127.5


@dataclass(frozen=True)
class StripeEnvironment(SyntheticEnvironment):
    """Bright band around a great circle; a straight line seen from the center.

    The stripe covers directions within half_width_deg of the plane through
    the origin with the given normal, so any ideal pinhole view renders it
    as a straight line.
    """

    normal: tuple[float, float, float] = (0.15, 1.0, 0.0)
    half_width_deg: float = 0.75
    fg: float = 255.0
    bg: float = 30.0

    def sample(self, dirs: np.ndarray) -> np.ndarray:
        n = np.asarray(self.normal, dtype=np.float64)
        n = n / np.linalg.norm(n)
        off = np.degrees(
            np.arcsin(np.clip(np.asarray(dirs, dtype=np.float64) @ n, -1.0, 1.0))
        )
        value = np.where(np.abs(off) <= self.half_width_deg, self.fg, self.bg)
        return np.repeat(value[..., None], 3, axis=-1)


@dataclass(frozen=True)
class EquirectEnvironment(SyntheticEnvironment):
    """Environment backed by an equirectangular image, bilinear with lon wrap."""

    image: RasterImage

    def sample(self, dirs: np.ndarray) -> np.ndarray:
        dirs = np.asarray(dirs, dtype=np.float64)
        h, w = self.image.height, self.image.width
        lon = np.degrees(np.arctan2(dirs[..., 0], dirs[..., 2]))
        lat = np.degrees(np.arcsin(np.clip(dirs[..., 1], -1.0, 1.0)))
        px = (lon + 180.0) * (w / 360.0) - 0.5
        py = (90.0 - lat) * (h / 180.0) - 0.5
        x0 = np.floor(px)
        y0 = np.floor(py)
        fx = (px - x0)[..., None]
        fy = (py - y0)[..., None]
        x0r = x0.astype(np.int64)
        y0r = y0.astype(np.int64)
        x0i = x0r % w
        x1i = (x0r + 1) % w
        y0i = np.clip(y0r, 0, h - 1)
        y1i = np.clip(y0r + 1, 0, h - 1)
        data = self.image.data.astype(np.float64)
        top = data[y0i, x0i] * (1.0 - fx) + data[y0i, x1i] * fx
        bot = data[y1i, x0i] * (1.0 - fx) + data[y1i, x1i] * fx
        out = top * (1.0 - fy) + bot * fy
        if out.shape[-1] == 1:
            out = np.repeat(out, 3, axis=-1)
        return out


@dataclass(frozen=True)
class SyntheticCamera:
    """Camera for the ball render: orthographic or perspective at a distance.

    fill_fraction controls framing: the ball silhouette radius is that
    fraction of half the smaller image dimension. orientation rotates world
    directions into the camera frame, letting tests stage multi-camera rigs.
    """

    mode: str = "orthographic"
    width: int = 512
    height: int = 512
    radius_mm: float = 50.0
    distance_mm: float = 500.0
    fill_fraction: float = 0.9
    orientation: Rotation3 = field(default_factory=Rotation3.identity)

    def __post_init__(self):
        if self.mode not in ("orthographic", "perspective"):
            raise ValueError(f"unknown camera mode {self.mode!r}")
        if self.mode == "perspective" and self.distance_mm <= self.radius_mm:
            raise ValueError("perspective camera must sit outside the ball")
        if not 0.0 < self.fill_fraction <= 1.0:
            raise ValueError("fill_fraction must be in (0, 1]")

    def silhouette(self) -> BallCircle:
        r = self.fill_fraction * min(self.width, self.height) / 2.0
        return BallCircle(self.width / 2.0 - 0.5, self.height / 2.0 - 0.5, r)


def raytrace_ball(
    env: SyntheticEnvironment,
    cam: SyntheticCamera,
    background=BACKGROUND_RGB,
    row_chunk: int = 256,
) -> tuple[RasterImage, BallCircle]:
    """Render the mirror ball and return the image plus its exact silhouette.

    Orthographic mode uses parallel rays along -z; perspective mode casts
    rays from a pinhole at distance d on the +z axis toward the unit ball.
    Each visible pixel reflects its view ray off the analytically
    intersected sphere and samples the environment along the result.
    """
    circle = cam.silhouette()
    out = np.empty((cam.height, cam.width, 3), dtype=np.uint8)
    bg = np.asarray(background, dtype=np.float64)
    xs = np.arange(cam.width, dtype=np.float64)
    ix_row = (xs - circle.cx) / circle.r_px

    d_ratio = cam.distance_mm / cam.radius_mm
    if cam.mode == "perspective":
        # Focal length placing the tangent silhouette at the framed radius.
        beta = math.asin(1.0 / d_ratio)
        focal = circle.r_px / math.tan(beta)

    for y0 in range(0, cam.height, row_chunk):
        y1 = min(y0 + row_chunk, cam.height)
        ys = np.arange(y0, y1, dtype=np.float64)
        iy = (circle.cy - ys)[:, None] / circle.r_px
        ix = np.broadcast_to(ix_row[None, :], (y1 - y0, cam.width))
        iy = np.broadcast_to(iy, ix.shape)

        if cam.mode == "orthographic":
            rho_sq = ix * ix + iy * iy
            hit = rho_sq <= 1.0
            nz = np.sqrt(np.clip(1.0 - rho_sq, 0.0, None))
            normals = np.stack([ix, iy, nz], axis=-1)
            incident = np.zeros_like(normals)
            incident[..., 2] = 1.0
            rays = reflect_array(incident, normals)
        else:
            # View directions through the sensor toward -z; sphere of radius
            # 1 at the origin, camera at (0, 0, d/R).
            sx = (xs[None, :] - circle.cx) / focal
            sy = (circle.cy - ys[:, None]) / focal
            dirs = np.empty(ix.shape + (3,), dtype=np.float64)
            dirs[..., 0] = sx
            dirs[..., 1] = sy
            dirs[..., 2] = -1.0
            dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
            b = d_ratio * dirs[..., 2]
            c = d_ratio * d_ratio - 1.0
            disc = b * b - c
            hit = disc >= 0.0
            t = -b - np.sqrt(np.clip(disc, 0.0, None))
            q = dirs * t[..., None]
            q[..., 2] += d_ratio
            normals = q
            # the reflection law takes the ray pointing away from the
            # surface back toward the camera
            rays = reflect_array(-dirs, normals)

        env_dirs = cam.orientation.inverse().apply(rays)
        colors = env.sample(env_dirs)
        block = np.where(hit[..., None], colors, bg)
        out[y0:y1] = np.floor(block + 0.5).astype(np.uint8)
    return RasterImage(out), circle


def reflected_ray_angles(cam: SyntheticCamera, row_chunk: int = 256) -> np.ndarray:
    """Max angle from +z (degrees) of the reflected ray per row block, flattened.

    Used to measure the field of view actually present in a render without
    holding a full direction buffer.
    """
    circle = cam.silhouette()
    d_ratio = cam.distance_mm / cam.radius_mm
    if cam.mode == "perspective":
        beta = math.asin(1.0 / d_ratio)
        focal = circle.r_px / math.tan(beta)
    xs = np.arange(cam.width, dtype=np.float64)
    maxima = []
    for y0 in range(0, cam.height, row_chunk):
        y1 = min(y0 + row_chunk, cam.height)
        ys = np.arange(y0, y1, dtype=np.float64)
        if cam.mode == "orthographic":
            ix = (xs[None, :] - circle.cx) / circle.r_px
            iy = (circle.cy - ys[:, None]) / circle.r_px
            rho_sq = ix * ix + iy * iy
            hit = rho_sq <= 1.0
            nz = np.sqrt(np.clip(1.0 - rho_sq, 0.0, None))
            rz = 2.0 * nz * nz - 1.0
        else:
            sx = (xs[None, :] - circle.cx) / focal
            sy = (circle.cy - ys[:, None]) / focal
            norm = np.sqrt(sx * sx + sy * sy + 1.0)
            dz = -1.0 / norm
            b = d_ratio * dz
            c = d_ratio * d_ratio - 1.0
            disc = b * b - c
            hit = disc >= 0.0
            t = -b - np.sqrt(np.clip(disc, 0.0, None))
            dx = sx / norm
            dy = sy / norm
            qx = dx * t
            qy = dy * t
            qz = dz * t + d_ratio
            dot = dx * qx + dy * qy + dz * qz
            rz = dz - 2.0 * dot * qz
        if np.any(hit):
            maxima.append(float(np.min(rz[hit])))
    angles = np.degrees(np.arccos(np.clip(np.asarray(maxima), -1.0, 1.0)))
    return angles


def max_reflected_angle_deg(cam: SyntheticCamera) -> float:
    """Largest reflected-ray angle from +z present in a render of cam."""
    return float(reflected_ray_angles(cam).max())


def ground_truth_view(
    env: SyntheticEnvironment, spec: OutputSpec
) -> RasterImage:
    """Render the environment directly (no ball) in an output projection."""
    rays = output_rays(spec)
    colors = env.sample(rays)
    return RasterImage(np.floor(colors + 0.5).astype(np.uint8))


def ground_truth_equirect(env: SyntheticEnvironment, w: int, h: int) -> RasterImage:
    return ground_truth_view(env, EquirectSpec(w, h))
