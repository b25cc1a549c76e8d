"""Command-line surface: unwrap, reproject, register, merge, alpha, selftest, serve.

Exit codes: 0 success, 2 validation failure (bad flags, bad values,
degenerate inputs), 1 IO failure (missing or corrupt files). All angle
flags take degrees, all lengths millimeters.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path


from . import _kernels
from .config import ProjectConfig
from .imageio import DecodeError, encode_png, load_image, save_image
from .projection import (
    BallGeometry,
    DiskPoint,
    FovAlpha,
    alpha_from_geometry,
)
from .registration import (
    BlendPolicy,
    Correspondence,
    Rig,
    RigSource,
    estimate_rotation,
    merge_views,
    rays_from_correspondences,
)
from .remap import (
    BallCircle,
    BallView,
    EquirectSpec,
    VirtualCamera,
    build_table,
    resample,
)
from .render import ViewState, load_current_frames, render_view_state
from .rotation import DegenerateRaysError, Rotation3


def _parse_circle(text: str) -> BallCircle:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("circle must be cx,cy,r_px")
    try:
        cx, cy, r = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"circle values must be numbers: {text!r}")
    return BallCircle(cx, cy, r)


def _pixel_to_disk(x: float, y: float, circle: BallCircle) -> DiskPoint:
    return DiskPoint((x - circle.cx) / circle.r_px, (circle.cy - y) / circle.r_px)


def _load_pairs(path: Path, circle_a: BallCircle, circle_b: BallCircle):
    doc = json.loads(path.read_text())
    pairs = []
    for item in doc:
        ax, ay = (float(v) for v in item["a"])
        bx, by = (float(v) for v in item["b"])
        pairs.append(
            Correspondence(
                _pixel_to_disk(ax, ay, circle_a), _pixel_to_disk(bx, by, circle_b)
            )
        )
    return pairs


def _cmd_alpha(args) -> int:
    fov = alpha_from_geometry(BallGeometry(args.radius_mm, args.distance_mm))
    print(f"{fov.alpha_deg:.2f} deg")
    return 0


def _single_view(args) -> BallView:
    image = load_image(args.image)
    return BallView(image=image, circle=args.circle, fov=FovAlpha(args.alpha))


def _cmd_unwrap(args) -> int:
    view = _single_view(args)
    table = build_table(view, EquirectSpec(args.width, args.height))
    out = resample(view.image, table)
    save_image(args.out, out)
    if args.save_table:
        table.save(args.save_table)
    print(f"wrote {args.out} ({args.width}x{args.height} px equirect)")
    return 0


def _cmd_reproject(args) -> int:
    if args.config:
        config = ProjectConfig.load(args.config)
        state = ViewState(
            yaw_deg=args.yaw,
            pitch_deg=args.pitch,
            roll_deg=args.roll,
            hfov_deg=args.hfov,
            width=args.width,
            height=args.height,
            layer=_layer_policy(args),
        )
        frames = load_current_frames(config)
        out = render_view_state(config.rig, frames, state)
        Path(args.out).write_bytes(encode_png(out))
        print(f"wrote {args.out} ({args.width}x{args.height} px pinhole)")
        return 0
    if not args.image or not args.circle or args.alpha is None:
        raise ValueError("reproject needs --config or --image/--circle/--alpha")
    view = _single_view(args)
    cam = VirtualCamera(
        yaw_deg=args.yaw,
        pitch_deg=args.pitch,
        roll_deg=args.roll,
        hfov_deg=args.hfov,
        out_width=args.width,
        out_height=args.height,
    )
    table = build_table(view, cam)
    out = resample(view.image, table)
    save_image(args.out, out)
    if args.save_table:
        table.save(args.save_table)
    print(f"wrote {args.out} ({args.width}x{args.height} px pinhole)")
    return 0


def _layer_policy(args) -> BlendPolicy | None:
    if getattr(args, "layer", None):
        return BlendPolicy(policy="switch", active=args.layer)
    if getattr(args, "blend", None) is not None:
        return BlendPolicy(policy="blend", weights=_blend_weights(args.blend))
    return None


def _blend_weights(spec: str) -> dict[str, float]:
    weights = {}
    for part in spec.split(","):
        sid, _, value = part.partition("=")
        if not value:
            raise ValueError(f"blend weights look like id=w, got {part!r}")
        weights[sid] = float(value)
    return weights


def _cmd_register(args) -> int:
    pairs = _load_pairs(Path(args.pairs), args.circle_a, args.circle_b)
    fov_a, fov_b = FovAlpha(args.alpha_a), FovAlpha(args.alpha_b)
    rays_a, rays_b = rays_from_correspondences(pairs, fov_a, fov_b)
    rotation, residual = estimate_rotation(rays_a, rays_b)
    print(f"rotation (a rays -> b rays), residual {residual:.4f} deg:")
    for row in rotation.matrix:
        print("  [{: .6f} {: .6f} {: .6f}]".format(*row))
    if args.out:
        if args.reference == "a":
            # Reference a: b's rays map into a's frame by the inverse.
            rot_a, rot_b = Rotation3.identity(), rotation.inverse()
            reference = args.id_a
        else:
            rot_a, rot_b = rotation, Rotation3.identity()
            reference = args.id_b
        rig = Rig(
            reference=reference,
            sources=(
                RigSource(args.id_a, args.circle_a, fov_a, rot_a),
                RigSource(args.id_b, args.circle_b, fov_b, rot_b),
            ),
            blend=BlendPolicy(policy="switch", active=reference),
        )
        Path(args.out).write_text(json.dumps(rig.to_json_dict(), indent=2) + "\n")
        print(f"wrote rig to {args.out}")
    return 0


def _merge_one(config, frames, spec, out_path, write_layers):
    from .render import views_from_frames

    views = views_from_frames(config.rig, frames)
    result = merge_views(config.rig, views, spec)
    save_image(out_path, result.combined)
    if write_layers:
        stem = Path(out_path)
        for sid, layer in result.layers.items():
            save_image(stem.with_name(f"{stem.stem}_{sid}{stem.suffix}"), layer)


def _cmd_merge(args) -> int:
    config = ProjectConfig.load(args.config)
    if args.mode == "equirect":
        spec = EquirectSpec(args.width, args.height)
    else:
        spec = VirtualCamera(
            yaw_deg=args.yaw,
            pitch_deg=args.pitch,
            roll_deg=args.roll,
            hfov_deg=args.hfov,
            out_width=args.width,
            out_height=args.height,
        )
    frame_paths = config.load_frames()
    counts = {len(v) for v in frame_paths.values()}
    n_frames = max(counts)
    if len(counts) > 1 and counts != {1, n_frames}:
        raise ValueError("sources have mismatched frame counts")
    if n_frames == 1:
        frames = {sid: load_image(p[0]) for sid, p in frame_paths.items()}
        _merge_one(config, frames, spec, args.out, args.layers)
        print(f"wrote {args.out}")
        return 0
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def render_frame(index: int) -> Path:
        frames = {
            sid: load_image(p[index] if len(p) > 1 else p[0])
            for sid, p in frame_paths.items()
        }
        path = out_dir / f"frame_{index:05d}.png"
        _merge_one(config, frames, spec, path, args.layers)
        return path

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        for path in pool.map(render_frame, range(n_frames)):
            print(f"wrote {path}")
    return 0


def _cmd_selftest(args) -> int:
    from . import selftest

    return selftest.run(verbose=True)


def _cmd_serve(args) -> int:
    from .service import serve

    config = ProjectConfig.load(args.config)
    serve(config, host=args.host, port=args.port)
    return 0


def _add_view_flags(p, hfov_default=60.0, width=640, height=480):
    p.add_argument("--yaw", type=float, default=0.0, help="view yaw, degrees")
    p.add_argument("--pitch", type=float, default=0.0, help="view pitch, degrees")
    p.add_argument("--roll", type=float, default=0.0, help="view roll, degrees")
    p.add_argument(
        "--hfov", type=float, default=hfov_default, help="horizontal fov, degrees"
    )
    p.add_argument("--width", type=int, default=width)
    p.add_argument("--height", type=int, default=height)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbview",
        description=(
            "Mirror-ball camera toolkit: unwrap ball views into panoramas, "
            "register and merge multiple feeds, serve a live viewer. "
            f"(remap kernels: {_kernels.BACKEND})"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("alpha", help="reflected field of view from ball geometry")
    p.add_argument("--radius-mm", type=float, required=True)
    p.add_argument("--distance-mm", type=float, required=True)
    p.set_defaults(func=_cmd_alpha)

    p = sub.add_parser("unwrap", help="one ball view to an equirect panorama")
    p.add_argument("--image", required=True)
    p.add_argument("--circle", type=_parse_circle, required=True, metavar="CX,CY,R")
    p.add_argument("--alpha", type=float, required=True, help="fov alpha, degrees")
    p.add_argument("--width", type=int, default=1024)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--out", required=True)
    p.add_argument("--save-table", help="also dump the remap table (binary)")
    p.set_defaults(func=_cmd_unwrap)

    p = sub.add_parser("reproject", help="virtual pinhole view of a ball capture")
    p.add_argument("--config", help="project config (merged render)")
    p.add_argument("--image", help="single source image (standalone render)")
    p.add_argument("--circle", type=_parse_circle, metavar="CX,CY,R")
    p.add_argument("--alpha", type=float, help="fov alpha, degrees")
    p.add_argument("--layer", help="switch to this source id (config mode)")
    p.add_argument("--blend", help="blend weights id=w,id=w (config mode)")
    _add_view_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--save-table", help="also dump the remap table (binary)")
    p.set_defaults(func=_cmd_reproject)

    p = sub.add_parser("register", help="estimate rotation from correspondences")
    p.add_argument("--pairs", required=True, help="JSON list of {a:[x,y], b:[x,y]}")
    p.add_argument("--circle-a", type=_parse_circle, required=True, metavar="CX,CY,R")
    p.add_argument("--circle-b", type=_parse_circle, required=True, metavar="CX,CY,R")
    p.add_argument("--alpha-a", type=float, required=True)
    p.add_argument("--alpha-b", type=float, required=True)
    p.add_argument("--id-a", default="a")
    p.add_argument("--id-b", default="b")
    p.add_argument("--reference", choices=("a", "b"), default="a")
    p.add_argument("--out", help="write the registered rig JSON here")
    p.set_defaults(func=_cmd_register)

    p = sub.add_parser("merge", help="merge registered sources into one output")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=("equirect", "pinhole"), default="equirect")
    _add_view_flags(p, width=1024, height=512)
    p.add_argument("--out", required=True, help="output file (dir for sequences)")
    p.add_argument("--layers", action="store_true", help="also write per-source layers")
    p.add_argument("--jobs", type=int, default=4, help="parallel frame renders")
    p.set_defaults(func=_cmd_merge)

    p = sub.add_parser("selftest", help="run the built-in oracle verification")
    p.set_defaults(func=_cmd_selftest)

    p = sub.add_parser("serve", help="start the HTTP/WebSocket stream service")
    p.add_argument("--config", required=True)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DecodeError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, DegenerateRaysError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
