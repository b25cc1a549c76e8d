"""Proper 3x3 rotations and least-squares rotation fitting between ray sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_ORTHO_TOL = 1e-9


class DegenerateRaysError(ValueError):
    """Raised when ray correspondences cannot pin down a rotation."""


def _check_rotation(m: np.ndarray, tol: float = _ORTHO_TOL) -> None:
    if m.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {m.shape}")
    err = np.abs(m.T @ m - np.eye(3)).max()
    if err > tol:
        raise ValueError(f"matrix is not orthonormal (max deviation {err:.3e})")
    det = float(np.linalg.det(m))
    if abs(det - 1.0) > tol:
        raise ValueError(f"matrix is not a proper rotation (det {det:.12f})")


@dataclass(frozen=True, eq=False)
class Rotation3:
    """Proper rotation matrix, row-major, validated on construction."""

    matrix: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64).reshape(3, 3)
        _check_rotation(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __eq__(self, other):
        if not isinstance(other, Rotation3):
            return NotImplemented
        return bool(np.array_equal(self.matrix, other.matrix))

    def __hash__(self):
        return hash(self.matrix.tobytes())

    @classmethod
    def identity(cls) -> "Rotation3":
        return cls(np.eye(3))

    @classmethod
    def from_rows(cls, values) -> "Rotation3":
        """Build from 9 numbers in row-major order."""
        arr = np.asarray(list(values), dtype=np.float64)
        if arr.size != 9:
            raise ValueError("rotation needs exactly 9 numbers")
        return cls(arr.reshape(3, 3))

    @classmethod
    def about_axis(cls, axis, angle_deg: float) -> "Rotation3":
        """Rotation by angle_deg about a (not necessarily unit) axis."""
        a = np.asarray(axis, dtype=np.float64)
        n = np.linalg.norm(a)
        if n < 1e-12:
            raise ValueError("rotation axis must be nonzero")
        x, y, z = a / n
        t = math.radians(angle_deg)
        c, s = math.cos(t), math.sin(t)
        k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
        return cls(np.eye(3) + s * k + (1.0 - c) * (k @ k))

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        """Rotate vectors of shape (..., 3)."""
        return np.asarray(vectors, dtype=np.float64) @ self.matrix.T

    def compose(self, other: "Rotation3") -> "Rotation3":
        """self after other: (self.compose(other)).apply(v) = self(other(v))."""
        return Rotation3(self.matrix @ other.matrix)

    def inverse(self) -> "Rotation3":
        return Rotation3(self.matrix.T)

    def rows(self) -> list[float]:
        """Row-major list of 9 floats, the wire format."""
        return [float(v) for v in self.matrix.reshape(-1)]

    def is_identity(self, tol: float = 1e-9) -> bool:
        return bool(np.abs(self.matrix - np.eye(3)).max() <= tol)


def yaw_pitch_roll(yaw_deg: float, pitch_deg: float, roll_deg: float) -> Rotation3:
    """Camera-to-world rotation for a virtual view.

    With x right, y up, z forward: positive yaw turns the view toward +x,
    positive pitch tilts it up toward +y, roll spins about the view axis.
    Applied as Ry(yaw) . Rx(-pitch) . Rz(roll) to camera-frame rays.
    """
    ry = Rotation3.about_axis((0.0, 1.0, 0.0), yaw_deg)
    rx = Rotation3.about_axis((1.0, 0.0, 0.0), -pitch_deg)
    rz = Rotation3.about_axis((0.0, 0.0, 1.0), roll_deg)
    return ry.compose(rx).compose(rz)


def geodesic_angle_deg(a: Rotation3, b: Rotation3) -> float:
    """Angle of the relative rotation between a and b, in degrees."""
    rel = a.matrix.T @ b.matrix
    c = (np.trace(rel) - 1.0) / 2.0
    return math.degrees(math.acos(max(-1.0, min(1.0, float(c)))))


def fit_rotation(
    rays_from: np.ndarray, rays_to: np.ndarray
) -> tuple[Rotation3, float]:
    """Best proper rotation R minimizing sum |R a_i - b_i|^2 over unit rays.

    Solved in closed form via SVD of the cross-covariance; the sign of the
    smallest singular direction is flipped when the unconstrained optimum
    is a reflection, so det(R) = +1 always holds. Returns the rotation and
    the RMS angular residual in degrees.

    Raises DegenerateRaysError when fewer than 2 pairs are given or the rays
    within a set are all mutually parallel (rank < 2): a rotation about the
    common axis is then unobservable.
    """
    a = np.asarray(rays_from, dtype=np.float64).reshape(-1, 3)
    b = np.asarray(rays_to, dtype=np.float64).reshape(-1, 3)
    if a.shape != b.shape:
        raise ValueError("ray sets must have matching lengths")
    if a.shape[0] < 2:
        raise DegenerateRaysError(
            "need at least 2 ray pairs to recover a rotation"
        )
    cross = b.T @ a
    u, sing, vt = np.linalg.svd(cross)
    # Parallel-ray degeneracy: the cross-covariance collapses to rank 1.
    if sing[1] <= 1e-9 * max(sing[0], 1e-300):
        raise DegenerateRaysError(
            "ray directions are mutually parallel; rotation is unrecoverable"
        )
    d = np.sign(np.linalg.det(u @ vt))
    if d == 0.0:
        d = 1.0
    r = u @ np.diag([1.0, 1.0, d]) @ vt
    rot = Rotation3(r)
    mapped = rot.apply(a)
    cosines = np.clip(np.sum(mapped * b, axis=1), -1.0, 1.0)
    angles = np.degrees(np.arccos(cosines))
    residual_deg = float(np.sqrt(np.mean(angles**2)))
    return rot, residual_deg


def random_rotation(rng: np.random.Generator) -> Rotation3:
    """Uniform random proper rotation (QR of a Gaussian matrix, det-fixed)."""
    m = rng.normal(size=(3, 3))
    q, r = np.linalg.qr(m)
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return Rotation3(q)
