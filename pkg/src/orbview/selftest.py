"""Built-in verification pass: quick synthetic checks behind `orbview selftest`.

Smaller renders than the full test suite, same pass criteria. Each check
prints one line; the command exits nonzero if any check fails.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .oracle import (
    CheckerEnvironment,
    SyntheticCamera,
    ground_truth_equirect,
    max_reflected_angle_deg,
    raytrace_ball,
)
from .projection import (
    BallGeometry,
    FovAlpha,
    alpha_from_geometry,
    forward_project_array,
    inverse_project_array,
)
from .remap import BallView, build_equirect_table, equirect_rays, resample


def _sample_rays(n: int, seed: int = 7) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def run(verbose: bool = True) -> int:
    checks: list[tuple[str, bool, str]] = []

    rays = _sample_rays(10_000)
    improved, valid = forward_project_array(rays, 360.0)
    # Literal orthographic term, written out independently of the code path
    # under test.
    denom = np.sqrt(2.0 * (rays[valid, 2] + 1.0))
    classical = rays[valid, :2] / denom[:, None]
    dev = np.abs(classical - improved[valid]).max()
    checks.append(
        ("orthographic limit matches classical term", dev < 1e-12, f"max dev {dev:.2e}")
    )

    alpha = 300.0
    cone = rays[rays[:, 2] > np.cos(np.radians(alpha / 2)) + 1e-6]
    disk, valid = forward_project_array(cone, alpha)
    back = inverse_project_array(disk[valid], alpha)
    rt = np.abs(back - cone[valid]).max()
    checks.append(("projection round-trip at alpha=300", rt < 1e-7, f"max dev {rt:.2e}"))

    geom = BallGeometry(50.0, 500.0)
    cam = SyntheticCamera(
        mode="perspective", width=768, height=768, radius_mm=50.0, distance_mm=500.0
    )
    measured = max_reflected_angle_deg(cam)
    expected = alpha_from_geometry(geom).alpha_deg / 2.0
    diff = abs(measured - expected)
    checks.append(
        ("field of view matches ray-trace oracle", diff < 0.5, f"diff {diff:.3f} deg")
    )

    env = CheckerEnvironment()
    ball, circle = raytrace_ball(env, SyntheticCamera(width=2048, height=2048))
    view = BallView(ball, circle, FovAlpha(360.0))
    table = build_equirect_table(view, 1024, 512)
    unwrap = resample(ball, table)
    truth = ground_truth_equirect(env, 1024, 512)
    angles = np.degrees(
        np.arccos(np.clip(equirect_rays(1024, 512)[..., 2], -1.0, 1.0))
    )
    mask = angles <= 160.0
    mae = float(
        np.abs(
            unwrap.data[mask].astype(np.float64) - truth.data[mask].astype(np.float64)
        ).mean()
    )
    checks.append(("unwrap matches direct render", mae <= 2.0, f"MAE {mae:.3f}"))

    failed = 0
    for name, ok, detail in checks:
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name} ({detail})")
        failed += 0 if ok else 1
    if verbose:
        print(f"kernels: {_kernels.BACKEND}; {len(checks) - failed}/{len(checks)} passed")
    return 1 if failed else 0
