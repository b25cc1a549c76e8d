"""Remap table construction, resampling, and the serialized table format."""

import io
import math

import numpy as np
import pytest

from orbview.projection import FovAlpha
from orbview.raster import RasterImage
from orbview.remap import (
    BallCircle,
    BallView,
    EquirectSpec,
    RemapTable,
    VirtualCamera,
    build_equirect_table,
    build_pinhole_table,
    build_table,
    disk_to_pixels,
    equirect_rays,
    pinhole_rays,
    resample,
)
from orbview.rotation import Rotation3, yaw_pitch_roll


def checker_image(size=256, cells=8):
    y, x = np.mgrid[0:size, 0:size]
    cell = size // cells
    value = (((x // cell) + (y // cell)) % 2) * 200 + 30
    return RasterImage(np.repeat(value[..., None].astype(np.uint8), 3, axis=2))


def default_view(alpha=360.0, size=256, orientation=None):
    circle = BallCircle(size / 2 - 0.5, size / 2 - 0.5, size * 0.45)
    return BallView(
        image=checker_image(size),
        circle=circle,
        fov=FovAlpha(alpha),
        orientation=orientation or Rotation3.identity(),
    )


class TestDiskToPixels:
    def test_center(self):
        sx, sy = disk_to_pixels(0.0, 0.0, BallCircle(500, 400, 300))
        assert (sx, sy) == (500.0, 400.0)

    def test_rim(self):
        sx, sy = disk_to_pixels(1.0, 0.0, BallCircle(500, 400, 300))
        assert (sx, sy) == (800.0, 400.0)

    def test_y_flip(self):
        sx, sy = disk_to_pixels(0.0, 1.0, BallCircle(500, 400, 300))
        assert (sx, sy) == (500.0, 100.0)


class TestBallCircle:
    def test_radius_floor(self):
        with pytest.raises(ValueError):
            BallCircle(100, 100, 8.0)

    def test_view_rejects_circle_outside_image(self):
        img = checker_image(64)
        with pytest.raises(ValueError):
            BallView(img, BallCircle(10.0, 32.0, 20.0), FovAlpha(360.0))


class TestEquirectTable:
    def test_full_alpha_nearly_all_valid(self):
        table = build_equirect_table(default_view(360.0), 512, 256)
        invalid = 1.0 - table.valid_fraction()
        assert invalid < 0.001

    def test_alpha_300_blind_cap_solid_angle(self):
        # Solid-angle fraction of the cap beyond 150 deg from the axis:
        # (1 - cos 30) / 2, about 6.70%. Weight rows by cos(latitude).
        table = build_equirect_table(default_view(300.0), 1024, 512)
        lat = np.radians(90.0 - (np.arange(512) + 0.5) * (180.0 / 512))
        weights = np.broadcast_to(np.cos(lat)[:, None], table.valid.shape)
        measured = float((weights * ~table.valid).sum() / weights.sum())
        expected = (1.0 - math.cos(math.radians(30.0))) / 2.0
        assert measured == pytest.approx(expected, abs=1e-3)

    def test_valid_entries_stay_inside_disk(self):
        view = default_view(300.0)
        table = build_equirect_table(view, 256, 128)
        c = view.circle
        dx = table.src_x[table.valid].astype(np.float64) - c.cx
        dy = table.src_y[table.valid].astype(np.float64) - c.cy
        assert (dx * dx + dy * dy <= c.r_px**2 * (1 + 1e-6)).all()

    def test_yaw_orientation_shifts_longitude(self):
        # Rotating the view by a quarter turn about the vertical axis
        # relabels longitudes; the valid mask shifts by a quarter width.
        w, h = 256, 128
        base = build_equirect_table(default_view(300.0), w, h)
        turned = build_equirect_table(
            default_view(300.0, orientation=yaw_pitch_roll(90.0, 0.0, 0.0).inverse()),
            w,
            h,
        )
        np.testing.assert_array_equal(
            np.roll(base.valid, w // 4, axis=1), turned.valid
        )

    def test_deterministic(self):
        t1 = build_equirect_table(default_view(300.0), 128, 64)
        t2 = build_equirect_table(default_view(300.0), 128, 64)
        np.testing.assert_array_equal(t1.src_x, t2.src_x)
        np.testing.assert_array_equal(t1.src_y, t2.src_y)
        np.testing.assert_array_equal(t1.valid, t2.valid)

    def test_blind_circle_shrinks_as_alpha_grows(self):
        # the viewer's alpha slider relies on this monotone relation
        fractions = [
            build_equirect_table(default_view(alpha), 256, 128).valid_fraction()
            for alpha in (200.0, 250.0, 300.0, 350.0, 360.0)
        ]
        assert all(b > a for a, b in zip(fractions, fractions[1:]))


class TestPinholeTable:
    def test_forward_view_all_valid(self):
        cam = VirtualCamera(hfov_deg=60.0, out_width=160, out_height=120)
        table = build_pinhole_table(default_view(300.0), cam)
        assert table.valid.all()

    def test_pole_view_all_invalid(self):
        # hfov 40 at 4:3 keeps every ray within 25 deg of the view axis, so
        # aiming the view axis at the pole puts all of them beyond 150 deg.
        cam = VirtualCamera(
            yaw_deg=180.0, hfov_deg=40.0, out_width=160, out_height=120
        )
        view = default_view(300.0)
        rays = pinhole_rays(cam)
        assert np.degrees(np.arccos(rays[..., 2])).min() > 150.0
        table = build_pinhole_table(view, cam)
        assert not table.valid.any()

    def test_center_pixel_maps_to_circle_center(self):
        view = default_view(300.0)
        cam = VirtualCamera(hfov_deg=60.0, out_width=161, out_height=121)
        table = build_pinhole_table(view, cam)
        assert table.src_x[60, 80] == pytest.approx(view.circle.cx, abs=1e-4)
        assert table.src_y[60, 80] == pytest.approx(view.circle.cy, abs=1e-4)

    def test_orientation_composes_with_camera_yaw(self):
        q = Rotation3.about_axis((0.3, 1.0, -0.2), 37.0)
        cam_yawed = VirtualCamera(yaw_deg=25.0, out_width=96, out_height=64)
        cam_level = VirtualCamera(yaw_deg=0.0, out_width=96, out_height=64)
        t1 = build_pinhole_table(default_view(300.0, orientation=q), cam_yawed)
        ext = q.compose(yaw_pitch_roll(25.0, 0.0, 0.0))
        t2 = build_pinhole_table(default_view(300.0, orientation=ext), cam_level)
        np.testing.assert_array_equal(t1.valid, t2.valid)
        np.testing.assert_allclose(t1.src_x, t2.src_x, atol=1e-6)
        np.testing.assert_allclose(t1.src_y, t2.src_y, atol=1e-6)


class TestPoleResolutionFalloff:
    def test_view_extent_per_source_pixel_grows_toward_pole(self):
        # One source pixel covers an ever larger angular patch of the view
        # as the ray angle approaches the pole. Estimate the Jacobian of
        # source pixels per degree of view motion by finite differences on
        # the table (output steps rescaled to degrees: longitude steps
        # shrink by cos(latitude)); the inverse of its smallest singular
        # value must grow monotonically over angle bins.
        view = default_view(360.0, size=512)
        w, h = 512, 256
        table = build_equirect_table(view, w, h)
        sx = table.src_x.astype(np.float64)
        sy = table.src_y.astype(np.float64)
        lat = np.radians(90.0 - (np.arange(h) + 0.5) * 180.0 / h)
        deg_x = (np.cos(lat) * (360.0 / w))[:, None, None]
        deg_y = 180.0 / h
        dx = np.stack([np.gradient(sx, axis=1), np.gradient(sy, axis=1)], -1) / deg_x
        dy = np.stack([np.gradient(sx, axis=0), np.gradient(sy, axis=0)], -1) / deg_y
        jac = np.stack([dx, dy], axis=-2)  # (h, w, 2 view dims, 2 src dims)
        smallest = np.linalg.svd(jac, compute_uv=False)[..., -1]
        rays = equirect_rays(w, h)
        angle = np.degrees(np.arccos(np.clip(rays[..., 2], -1, 1)))
        # finite differences wrap at the seam columns and extreme rows
        interior = np.ones((h, w), bool)
        interior[:, :2] = interior[:, -2:] = False
        interior[:3, :] = interior[-3:, :] = False
        magnification = []
        bins = np.arange(10.0, 171.0, 10.0)
        for lo, hi in zip(bins[:-1], bins[1:]):
            sel = (angle >= lo) & (angle < hi) & table.valid & interior
            sel &= smallest > 1e-9
            magnification.append(float(np.mean(1.0 / smallest[sel])))
        assert all(b > a for a, b in zip(magnification, magnification[1:]))


class TestResample:
    def test_identity_table_is_bit_exact(self):
        img = checker_image(64)
        xs, ys = np.meshgrid(
            np.arange(64, dtype=np.float32), np.arange(64, dtype=np.float32)
        )
        table = RemapTable(xs, ys, np.ones((64, 64), dtype=bool))
        out = resample(img, table)
        np.testing.assert_array_equal(out.data, img.data)

    def test_all_invalid_gives_fill(self):
        img = checker_image(32)
        table = RemapTable(
            np.zeros((8, 8), np.float32),
            np.zeros((8, 8), np.float32),
            np.zeros((8, 8), bool),
        )
        out = resample(img, table, fill=(1, 2, 3))
        assert (out.data == np.array([1, 2, 3], dtype=np.uint8)).all()

    def test_fill_channel_mismatch_raises(self):
        img = checker_image(32)
        table = RemapTable(
            np.zeros((4, 4), np.float32),
            np.zeros((4, 4), np.float32),
            np.zeros((4, 4), bool),
        )
        with pytest.raises(ValueError):
            resample(img, table, fill=(0,))

    def test_sixteen_bit_pass_through(self):
        data = (np.arange(64 * 64, dtype=np.uint16).reshape(64, 64, 1) * 16) % 65535
        img = RasterImage(data)
        xs, ys = np.meshgrid(
            np.arange(64, dtype=np.float32), np.arange(64, dtype=np.float32)
        )
        table = RemapTable(xs, ys, np.ones((64, 64), dtype=bool))
        out = resample(img, table)
        assert out.data.dtype == np.uint16
        np.testing.assert_array_equal(out.data, img.data)

    def test_halfway_coordinates_average(self):
        img = RasterImage(
            np.array([[[0], [100]], [[0], [100]]], dtype=np.uint8)
        )
        table = RemapTable(
            np.full((1, 1), 0.5, np.float32),
            np.zeros((1, 1), np.float32),
            np.ones((1, 1), bool),
        )
        out = resample(img, table)
        assert out.data[0, 0, 0] == 50


class TestTableSerialization:
    def test_round_trip(self):
        table = build_equirect_table(default_view(300.0), 64, 32)
        again = RemapTable.from_bytes(table.to_bytes())
        np.testing.assert_array_equal(again.src_x, table.src_x)
        np.testing.assert_array_equal(again.src_y, table.src_y)
        np.testing.assert_array_equal(again.valid, table.valid)

    def test_layout(self):
        table = RemapTable(
            np.array([[1.5]], np.float32),
            np.array([[2.5]], np.float32),
            np.array([[True]]),
        )
        blob = table.to_bytes()
        assert blob[:4] == b"MBRT"
        assert blob[4:6] == (1).to_bytes(2, "little")
        assert int.from_bytes(blob[6:10], "little") == 1
        assert int.from_bytes(blob[10:14], "little") == 1
        assert len(blob) == 14 + 9

    def test_file_round_trip(self, tmp_path):
        table = build_equirect_table(default_view(200.0), 32, 16)
        path = tmp_path / "table.mbrt"
        table.save(path)
        again = RemapTable.load(path)
        np.testing.assert_array_equal(again.valid, table.valid)

    def test_bad_magic_rejected(self):
        with pytest.raises(ValueError):
            RemapTable.from_bytes(b"XXXX" + b"\x00" * 32)


class TestOutputSpecs:
    def test_build_table_dispatches(self):
        view = default_view(300.0)
        t_eq = build_table(view, EquirectSpec(64, 32))
        assert (t_eq.width, t_eq.height) == (64, 32)
        t_ph = build_table(view, VirtualCamera(out_width=32, out_height=24))
        assert (t_ph.width, t_ph.height) == (32, 24)

    def test_pinhole_rays_unit_length(self):
        cam = VirtualCamera(
            yaw_deg=30, pitch_deg=-20, roll_deg=10, hfov_deg=90,
            out_width=64, out_height=48,
        )
        rays = pinhole_rays(cam)
        np.testing.assert_allclose(
            np.linalg.norm(rays, axis=-1), 1.0, atol=1e-12
        )
