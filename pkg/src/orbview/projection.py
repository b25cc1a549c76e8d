"""Mirror-ball projection between reflection directions and disk coordinates.

A specular sphere imaged by a camera encodes (almost) the whole surrounding
environment in a single disk. This module holds the mapping between the two
sides of that encoding:

* a reflection direction, a unit 3-vector in the ball-centered frame with
  +z pointing back at the camera, and
* a point on the normalized image plane where the ball silhouette is the
  unit disk, x to the right and y up.

Two radial profiles are provided. The classical one assumes an orthographic
capture (telecentric lens); it maps the direction straight behind the ball
to the disk rim with vanishing resolution. The corrected one additionally
takes the reflected field of view ``alpha`` (always strictly between 180
and 360 degrees for a perspective capture, 360 in the orthographic limit)
and rescales the disk by ``sin(alpha/4)`` so that the rim corresponds to
the edge of what the capture actually sees. Directions inside the blind
cone behind the ball have no disk coordinate and stay undefined; in a
rendered unwrap they show up as a black disk around the pole.

Angles are degrees at every public surface, radians internally. Scalar
entry points work on the small frozen value types below; the ``*_array``
functions take stacked numpy arrays and are what the remap path builds on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Guard on (r_z + 1) before dividing in the projection terms. The pole is a
# measure-zero singularity; an undefined result beats a huge coordinate.
POLE_EPS = 1e-12

_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class ReflectionRay:
    """Unit direction in the ball-centered frame; +z is the camera axis."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if n < 1e-12:
            raise ValueError("reflection ray must have nonzero length")
        if abs(n - 1.0) > _UNIT_TOL:
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def angle_from_axis_deg(self) -> float:
        """Angle from the +z camera axis in degrees."""
        return math.degrees(math.acos(max(-1.0, min(1.0, self.z))))


@dataclass(frozen=True)
class DiskPoint:
    """Point on the normalized image plane; the ball silhouette is the unit disk."""

    ix: float
    iy: float

    def radius_sq(self) -> float:
        return self.ix * self.ix + self.iy * self.iy

    def on_ball(self, tol: float = 1e-9) -> bool:
        return self.radius_sq() <= 1.0 + tol


@dataclass(frozen=True)
class FovAlpha:
    """Reflected field of view in degrees, 180 < alpha <= 360.

    360 is the orthographic limit; perspective captures always see less.
    The stretch factor sin(alpha/4) therefore lives in (0.707, 1] and never
    needs a zero guard.
    """

    alpha_deg: float

    def __post_init__(self):
        if not 180.0 < self.alpha_deg <= 360.0:
            raise ValueError(
                f"alpha must be in (180, 360] degrees, got {self.alpha_deg}"
            )

    @property
    def quarter_sin(self) -> float:
        """sin(alpha/4), the radial stretch applied to the classical term."""
        return math.sin(math.radians(self.alpha_deg) / 4.0)

    @property
    def cos_half(self) -> float:
        """cos(alpha/2); a ray is representable iff r_z >= this value."""
        return math.cos(math.radians(self.alpha_deg) / 2.0)


@dataclass(frozen=True)
class SurfaceNormal:
    """Unit surface normal on the camera-facing hemisphere (nz >= 0)."""

    nx: float
    ny: float
    nz: float

    def __post_init__(self):
        n = math.sqrt(self.nx**2 + self.ny**2 + self.nz**2)
        if abs(n - 1.0) > _UNIT_TOL:
            raise ValueError("surface normal must be unit length")
        if self.nz < 0.0:
            raise ValueError("surface normal must face the camera (nz >= 0)")

    def as_array(self) -> np.ndarray:
        return np.array([self.nx, self.ny, self.nz], dtype=np.float64)


@dataclass(frozen=True)
class BallGeometry:
    """Physical ball radius and camera-to-ball-center distance, millimeters."""

    radius_mm: float
    distance_mm: float

    def __post_init__(self):
        if self.radius_mm <= 0.0:
            raise ValueError("ball radius must be positive")
        if self.distance_mm <= self.radius_mm:
            raise ValueError("camera must sit strictly outside the ball")


def reflect(incident: ReflectionRay, normal: SurfaceNormal) -> ReflectionRay:
    """Reflect a unit ray off a surface with the given unit normal.

    Returns 2(i.n)n - i, which is again unit length.
    """
    i = incident.as_array()
    n = normal.as_array()
    r = 2.0 * float(np.dot(i, n)) * n - i
    return ReflectionRay(float(r[0]), float(r[1]), float(r[2]))


def normal_at(p: DiskPoint) -> SurfaceNormal:
    """Surface normal of the unit ball under the disk point (orthographic view).

    On a unit sphere seen orthographically the normal's x,y components are
    the disk coordinates themselves; the depth component follows from unit
    length.
    """
    rho_sq = p.radius_sq()
    if rho_sq > 1.0 + 1e-12:
        raise ValueError(f"disk point ({p.ix}, {p.iy}) lies outside the unit disk")
    nz = math.sqrt(max(0.0, 1.0 - rho_sq))
    return SurfaceNormal(p.ix, p.iy, nz)


def classical_forward(r: ReflectionRay) -> DiskPoint | None:
    """Map a reflection direction to the disk assuming orthographic capture.

    Returns None (undefined) at the pole, where the denominator vanishes.
    """
    denom_sq = 2.0 * (r.z + 1.0)
    if r.z + 1.0 < POLE_EPS:
        return None
    d = math.sqrt(denom_sq)
    return DiskPoint(r.x / d, r.y / d)


def improved_forward(r: ReflectionRay, fov: FovAlpha) -> DiskPoint | None:
    """Map a reflection direction to the disk of a perspective capture.

    The classical mapping is stretched by 1/sin(alpha/4); directions whose
    stretched image leaves the unit disk fall in the blind cone and return
    None. Equivalently the result is defined iff r_z >= cos(alpha/2).
    """
    if r.z < fov.cos_half or r.z + 1.0 < POLE_EPS:
        return None
    d = math.sqrt(2.0 * (r.z + 1.0)) * fov.quarter_sin
    return DiskPoint(r.x / d, r.y / d)


def improved_inverse(p: DiskPoint, fov: FovAlpha) -> ReflectionRay:
    """Recover the reflection direction for an on-ball disk point.

    Inverts the stretched projection: with s = sin(alpha/4),
    r_z = 1 - 2 s^2 (ix^2 + iy^2) and the lateral components scale back by
    s * sqrt(2 (r_z + 1)). Round-trips with improved_forward on the defined
    cone.
    """
    rho_sq = p.radius_sq()
    if rho_sq > 1.0 + 1e-12:
        raise ValueError(
            f"disk point ({p.ix}, {p.iy}) lies outside the unit disk"
        )
    s = fov.quarter_sin
    rz = 1.0 - 2.0 * s * s * rho_sq
    scale = s * math.sqrt(2.0 * (rz + 1.0))
    return ReflectionRay(p.ix * scale, p.iy * scale, rz)


def alpha_from_geometry(geom: BallGeometry) -> FovAlpha:
    """Reflected field of view of a ball of radius R seen from distance d.

    The capture misses a cone of directions behind the ball; for far-away
    environment content its half-angle equals the ball's angular radius
    arcsin(R/d), giving alpha = 360 - 2 arcsin(R/d). Strictly increasing in
    d/R and tending to the orthographic 360 limit.
    """
    half_blind = math.degrees(math.asin(geom.radius_mm / geom.distance_mm))
    return FovAlpha(360.0 - 2.0 * half_blind)


def defined_region(fov: FovAlpha) -> float:
    """Cone half-angle (degrees) of representable rays around +z."""
    return fov.alpha_deg / 2.0


# --- array layer ----------------------------------------------------------
#
# The remap tables and the synthetic renders push millions of rays through
# the projection, so the same formulas exist in stacked form. Shapes are
# (..., 3) for rays and (..., 2) for disk points.


def forward_project_array(
    rays: np.ndarray, alpha_deg: float
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized improved_forward.

    Returns (disk (..., 2), valid (...,) bool). Entries with valid False are
    zero-filled, not meaningful.
    """
    rays = np.asarray(rays, dtype=np.float64)
    rz = rays[..., 2]
    a = math.radians(alpha_deg)
    s = math.sin(a / 4.0)
    cos_half = math.cos(a / 2.0)
    valid = (rz >= cos_half) & (rz + 1.0 >= POLE_EPS)
    denom = np.sqrt(2.0 * np.clip(rz + 1.0, POLE_EPS, None)) * s
    disk = np.zeros(rays.shape[:-1] + (2,), dtype=np.float64)
    np.divide(rays[..., 0], denom, out=disk[..., 0], where=valid)
    np.divide(rays[..., 1], denom, out=disk[..., 1], where=valid)
    return disk, valid


def classical_forward_array(rays: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized classical_forward; same contract as forward_project_array."""
    return forward_project_array(rays, 360.0)


def inverse_project_array(disk: np.ndarray, alpha_deg: float) -> np.ndarray:
    """Vectorized improved_inverse over on-ball points, shape (..., 2) -> (..., 3)."""
    disk = np.asarray(disk, dtype=np.float64)
    rho_sq = disk[..., 0] ** 2 + disk[..., 1] ** 2
    if np.any(rho_sq > 1.0 + 1e-12):
        raise ValueError("inverse_project_array: points outside the unit disk")
    s = math.sin(math.radians(alpha_deg) / 4.0)
    rz = 1.0 - 2.0 * s * s * rho_sq
    scale = s * np.sqrt(2.0 * (rz + 1.0))
    rays = np.empty(disk.shape[:-1] + (3,), dtype=np.float64)
    rays[..., 0] = disk[..., 0] * scale
    rays[..., 1] = disk[..., 1] * scale
    rays[..., 2] = rz
    return rays


def reflect_array(incident: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Vectorized law-of-reflection, both inputs unit, shape (..., 3)."""
    incident = np.asarray(incident, dtype=np.float64)
    normals = np.asarray(normals, dtype=np.float64)
    dots = np.sum(incident * normals, axis=-1, keepdims=True)
    return 2.0 * dots * normals - incident
