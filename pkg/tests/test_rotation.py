"""Rotation estimation tests: hand-built cases, noise recovery, degeneracies."""

import numpy as np
import pytest

from orbview.rotation import (
    DegenerateRaysError,
    Rotation3,
    fit_rotation,
    geodesic_angle_deg,
    random_rotation,
    yaw_pitch_roll,
)


def perturb_rays(rays, sigma_deg, rng):
    """Rotate each ray about a random perpendicular axis by N(0, sigma)."""
    out = []
    for ray in rays:
        helper = rng.normal(size=3)
        axis = np.cross(ray, helper)
        norm = np.linalg.norm(axis)
        while norm < 1e-9:
            helper = rng.normal(size=3)
            axis = np.cross(ray, helper)
            norm = np.linalg.norm(axis)
        angle = rng.normal(0.0, sigma_deg)
        out.append(Rotation3.about_axis(axis, angle).apply(ray))
    return np.asarray(out)


class TestRotation3:
    def test_identity(self):
        assert Rotation3.identity().is_identity()

    def test_rejects_non_orthonormal(self):
        m = np.eye(3)
        m[0, 1] = 1e-3
        with pytest.raises(ValueError):
            Rotation3(m)

    def test_rejects_reflection(self):
        with pytest.raises(ValueError):
            Rotation3(np.diag([1.0, 1.0, -1.0]))

    def test_compose_and_inverse(self):
        rng = np.random.default_rng(3)
        a = random_rotation(rng)
        b = random_rotation(rng)
        v = rng.normal(size=(5, 3))
        np.testing.assert_allclose(
            a.compose(b).apply(v), a.apply(b.apply(v)), atol=1e-12
        )
        assert a.compose(a.inverse()).is_identity(tol=1e-12)

    def test_rows_round_trip(self):
        rng = np.random.default_rng(4)
        r = random_rotation(rng)
        again = Rotation3.from_rows(r.rows())
        np.testing.assert_allclose(again.matrix, r.matrix, atol=0)

    def test_yaw_turns_toward_plus_x(self):
        d = yaw_pitch_roll(90.0, 0.0, 0.0).apply(np.array([0.0, 0.0, 1.0]))
        np.testing.assert_allclose(d, [1.0, 0.0, 0.0], atol=1e-12)

    def test_pitch_tilts_up(self):
        d = yaw_pitch_roll(0.0, 90.0, 0.0).apply(np.array([0.0, 0.0, 1.0]))
        np.testing.assert_allclose(d, [0.0, 1.0, 0.0], atol=1e-12)


class TestFitRotation:
    def test_identical_sets_give_identity(self):
        rays = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]])
        rot, residual = fit_rotation(rays, rays)
        assert rot.is_identity(tol=1e-12)
        assert residual == pytest.approx(0.0, abs=1e-9)

    def test_hand_built_quarter_turn(self):
        rays_a = np.array([[1.0, 0, 0], [0, 1.0, 0]])
        rays_b = np.array([[0, 1.0, 0], [-1.0, 0, 0]])
        rot, residual = fit_rotation(rays_a, rays_b)
        expected = Rotation3.about_axis((0, 0, 1), 90.0)
        assert geodesic_angle_deg(rot, expected) == pytest.approx(0.0, abs=1e-9)
        assert residual == pytest.approx(0.0, abs=1e-9)
        np.testing.assert_allclose(rot.apply(rays_a), rays_b, atol=1e-12)

    def test_single_pair_is_degenerate(self):
        with pytest.raises(DegenerateRaysError):
            fit_rotation(np.array([[0, 0, 1.0]]), np.array([[0, 0, 1.0]]))

    def test_parallel_rays_are_degenerate(self):
        rays = np.array([[0, 0, 1.0], [0, 0, 1.0], [0, 0, 1.0]])
        with pytest.raises(DegenerateRaysError):
            fit_rotation(rays, rays)

    def test_antiparallel_rays_are_degenerate(self):
        rays = np.array([[0, 0, 1.0], [0, 0, -1.0]])
        with pytest.raises(DegenerateRaysError):
            fit_rotation(rays, rays)

    def test_noise_recovery_monte_carlo(self):
        # 20 rays, 0.2 deg angular noise, 100 trials: the mean geodesic
        # error stays well under 0.15 deg.
        rng = np.random.default_rng(2024)
        errors = []
        for _ in range(100):
            truth = random_rotation(rng)
            rays_a = rng.normal(size=(20, 3))
            rays_a /= np.linalg.norm(rays_a, axis=1, keepdims=True)
            rays_b = perturb_rays(truth.apply(rays_a), 0.2, rng)
            est, _ = fit_rotation(rays_a, rays_b)
            errors.append(geodesic_angle_deg(est, truth))
        assert np.mean(errors) < 0.15

    def test_planted_reflection_still_proper(self):
        # Correspondences manufactured by a reflection: the unconstrained
        # least-squares optimum is improper, so this exercises the sign
        # correction path.
        rng = np.random.default_rng(11)
        rays_a = rng.normal(size=(12, 3))
        rays_a /= np.linalg.norm(rays_a, axis=1, keepdims=True)
        mirror = np.diag([1.0, 1.0, -1.0])
        rays_b = rays_a @ mirror.T
        rot, residual = fit_rotation(rays_a, rays_b)
        assert np.linalg.det(rot.matrix) == pytest.approx(1.0, abs=1e-9)
        assert residual > 0.0

    def test_equivariance_under_input_rotation(self):
        rng = np.random.default_rng(5)
        rays_a = rng.normal(size=(10, 3))
        rays_a /= np.linalg.norm(rays_a, axis=1, keepdims=True)
        truth = random_rotation(rng)
        rays_b = truth.apply(rays_a)
        q = random_rotation(rng)
        base, _ = fit_rotation(rays_a, rays_b)
        shifted, _ = fit_rotation(q.apply(rays_a), rays_b)
        np.testing.assert_allclose(
            shifted.matrix, base.matrix @ q.matrix.T, atol=1e-9
        )

    def test_residual_permutation_invariant(self):
        rng = np.random.default_rng(6)
        rays_a = rng.normal(size=(8, 3))
        rays_a /= np.linalg.norm(rays_a, axis=1, keepdims=True)
        truth = random_rotation(rng)
        rays_b = perturb_rays(truth.apply(rays_a), 0.5, rng)
        _, res1 = fit_rotation(rays_a, rays_b)
        perm = rng.permutation(len(rays_a))
        _, res2 = fit_rotation(rays_a[perm], rays_b[perm])
        # exact up to float summation order in the cross-covariance
        assert res1 == pytest.approx(res2, abs=1e-9)

    def test_estimates_are_always_proper(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            rays_a = rng.normal(size=(6, 3))
            rays_a /= np.linalg.norm(rays_a, axis=1, keepdims=True)
            rays_b = rng.normal(size=(6, 3))
            rays_b /= np.linalg.norm(rays_b, axis=1, keepdims=True)
            rot, _ = fit_rotation(rays_a, rays_b)
            np.testing.assert_allclose(
                rot.matrix.T @ rot.matrix, np.eye(3), atol=1e-9
            )
            assert np.linalg.det(rot.matrix) == pytest.approx(1.0, abs=1e-9)
