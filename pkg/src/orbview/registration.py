"""Registering multiple ball views and merging them into one projection.

Cameras looking at the same mirror ball encode the same environment; their
ray frames differ only by a rotation. This module estimates that rotation
from operator-picked point correspondences, persists the registered rig,
and merges the registered sources into layered / combined outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .projection import DiskPoint, FovAlpha, improved_inverse
from .raster import RasterImage, as_rgb8
from .remap import (
    BallCircle,
    BallView,
    OutputSpec,
    RemapTable,
    build_table,
    resample,
)
from .rotation import DegenerateRaysError, Rotation3, fit_rotation

RIG_SCHEMA_VERSION = 1

BLEND_POLICIES = ("switch", "blend")


@dataclass(frozen=True)
class Correspondence:
    """The same environment feature clicked in two views' disk frames."""

    point_a: DiskPoint
    point_b: DiskPoint

    def __post_init__(self):
        if not (self.point_a.on_ball() and self.point_b.on_ball()):
            raise ValueError("correspondence points must lie on the ball disk")


def rays_from_correspondences(
    pairs: list[Correspondence], fov_a: FovAlpha, fov_b: FovAlpha
) -> tuple[list, list]:
    """Lift disk correspondences to reflection rays, one list per view."""
    if len(pairs) < 2:
        raise DegenerateRaysError(
            f"need at least 2 correspondences, got {len(pairs)}"
        )
    rays_a = [improved_inverse(p.point_a, fov_a) for p in pairs]
    rays_b = [improved_inverse(p.point_b, fov_b) for p in pairs]
    return rays_a, rays_b


def estimate_rotation(rays_a, rays_b) -> tuple[Rotation3, float]:
    """Rotation taking view A rays onto view B rays plus RMS residual (deg)."""
    a = np.array([[r.x, r.y, r.z] for r in rays_a], dtype=np.float64)
    b = np.array([[r.x, r.y, r.z] for r in rays_b], dtype=np.float64)
    return fit_rotation(a, b)


@dataclass(frozen=True)
class BlendPolicy:
    """How merged layers combine: hard switch or weighted blend."""

    policy: str = "switch"
    weights: dict[str, float] = field(default_factory=dict)
    active: str | None = None  # switch policy: which source shows

    def __post_init__(self):
        if self.policy not in BLEND_POLICIES:
            raise ValueError(f"unknown blend policy {self.policy!r}")
        for sid, w in self.weights.items():
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"blend weight for {sid!r} outside [0, 1]: {w}")


@dataclass(frozen=True)
class RigSource:
    """One registered source: where its ball sits and how its rays rotate."""

    source_id: str
    circle: BallCircle
    fov: FovAlpha
    rotation: Rotation3  # source camera frame -> reference frame


@dataclass(frozen=True)
class Rig:
    """Registered multi-source configuration with a designated reference."""

    reference: str
    sources: tuple[RigSource, ...]
    blend: BlendPolicy = field(default_factory=BlendPolicy)

    def __post_init__(self):
        ids = [s.source_id for s in self.sources]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate source ids in rig")
        if self.reference not in ids:
            raise ValueError(f"reference {self.reference!r} is not a rig source")
        ref = self.source(self.reference)
        if not ref.rotation.is_identity():
            raise ValueError("reference source must carry the identity rotation")

    def source(self, source_id: str) -> RigSource:
        for s in self.sources:
            if s.source_id == source_id:
                return s
        raise KeyError(f"unknown source id {source_id!r}")

    def source_ids(self) -> list[str]:
        return [s.source_id for s in self.sources]

    def to_json_dict(self) -> dict:
        return {
            "schema_version": RIG_SCHEMA_VERSION,
            "reference": self.reference,
            "sources": [
                {
                    "id": s.source_id,
                    "circle": {
                        "cx": s.circle.cx,
                        "cy": s.circle.cy,
                        "r_px": s.circle.r_px,
                    },
                    "alpha_deg": s.fov.alpha_deg,
                    "rotation": s.rotation.rows(),
                }
                for s in self.sources
            ],
            "blend": {
                "policy": self.blend.policy,
                "weights": dict(self.blend.weights),
                **({"active": self.blend.active} if self.blend.active else {}),
            },
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Rig":
        version = doc.get("schema_version")
        if version != RIG_SCHEMA_VERSION:
            raise ValueError(f"unsupported rig schema version {version!r}")
        sources = tuple(
            RigSource(
                source_id=s["id"],
                circle=BallCircle(
                    float(s["circle"]["cx"]),
                    float(s["circle"]["cy"]),
                    float(s["circle"]["r_px"]),
                ),
                fov=FovAlpha(float(s["alpha_deg"])),
                rotation=Rotation3.from_rows(s["rotation"]),
            )
            for s in doc["sources"]
        )
        blend_doc = doc.get("blend", {})
        blend = BlendPolicy(
            policy=blend_doc.get("policy", "switch"),
            weights={k: float(v) for k, v in blend_doc.get("weights", {}).items()},
            active=blend_doc.get("active"),
        )
        return cls(reference=doc["reference"], sources=sources, blend=blend)


def effective_orientation(rig: Rig, view: BallView) -> Rotation3:
    """World(reference)-to-source-camera rotation for a view inside a rig.

    A reference-frame ray lands in source s's camera frame through the
    inverse of the registered source-to-reference rotation, composed with
    whatever extra orientation the view itself carries.
    """
    rig_rot = rig.source(view.source_id).rotation
    return view.orientation.compose(rig_rot.inverse())


# Piecewise-linear false-color ramp for thermal layers (black through
# violet, red, orange, yellow to white), sampled after per-frame min/max
# normalization.
_THERMAL_RAMP_STOPS = np.array(
    [
        [0.0, 0, 0, 0],
        [0.2, 64, 0, 96],
        [0.4, 160, 24, 64],
        [0.6, 224, 96, 0],
        [0.8, 255, 176, 0],
        [1.0, 255, 255, 255],
    ],
    dtype=np.float64,
)


def tone_map_thermal(image: RasterImage) -> RasterImage:
    """Map a single-channel frame onto the fixed false-color ramp.

    Values are min/max normalized per frame first; a constant frame maps to
    the ramp's origin.
    """
    if image.channels != 1:
        raise ValueError("tone mapping expects a single-channel image")
    data = image.data[..., 0].astype(np.float64)
    lo, hi = float(data.min()), float(data.max())
    t = np.zeros_like(data) if hi <= lo else (data - lo) / (hi - lo)
    pos = _THERMAL_RAMP_STOPS[:, 0]
    out = np.empty(data.shape + (3,), dtype=np.float64)
    for c in range(3):
        out[..., c] = np.interp(t, pos, _THERMAL_RAMP_STOPS[:, c + 1])
    return RasterImage(np.floor(out + 0.5).astype(np.uint8))


@dataclass(frozen=True)
class MergeResult:
    layers: dict[str, RasterImage]
    combined: RasterImage
    tables: dict[str, RemapTable]


def merge_views(
    rig: Rig,
    views: list[BallView],
    spec: OutputSpec,
    policy: BlendPolicy | None = None,
) -> MergeResult:
    """Remap every registered view into the output projection and combine.

    Per-source tables use the rig rotation composed with the view's own
    orientation. Switch policy passes the active source through untouched;
    blend converts layers to display RGB (thermal layers through the fixed
    ramp) and averages them by weight.
    """
    policy = policy or rig.blend
    by_id = {v.source_id: v for v in views}
    for sid in by_id:
        rig.source(sid)  # raises KeyError for unknown sources
    if not by_id:
        raise ValueError("merge_views needs at least one view")

    layers: dict[str, RasterImage] = {}
    tables: dict[str, RemapTable] = {}
    shape = None
    for sid, view in by_id.items():
        oriented = BallView(
            image=view.image,
            circle=view.circle,
            fov=view.fov,
            orientation=effective_orientation(rig, view),
            source_id=sid,
        )
        table = build_table(oriented, spec)
        layer = resample(view.image, table)
        if shape is None:
            shape = (layer.height, layer.width)
        elif (layer.height, layer.width) != shape:
            raise ValueError("layer dimension mismatch across sources")
        layers[sid] = layer
        tables[sid] = table

    if policy.policy == "switch":
        active = policy.active or rig.reference
        if active not in layers:
            raise KeyError(f"switch policy selects missing source {active!r}")
        combined = layers[active]
    else:
        acc = None
        total = 0.0
        for sid, layer in layers.items():
            w = policy.weights.get(sid, 1.0)
            if w == 0.0 and len(layers) > 1:
                continue
            rgb = tone_map_thermal(layer) if layer.channels == 1 else as_rgb8(layer)
            contrib = rgb.data.astype(np.float64) * w
            acc = contrib if acc is None else acc + contrib
            total += w
        if acc is None or total == 0.0:
            raise ValueError("blend weights sum to zero")
        combined = RasterImage(np.floor(acc / total + 0.5).astype(np.uint8))
    return MergeResult(layers=layers, combined=combined, tables=tables)
