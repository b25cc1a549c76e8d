"""Shared view-state rendering used by both the CLI and the stream service.

Keeping a single render entry point is what makes the service's frames
byte-identical to the CLI's: both funnel through render_view_state and the
deterministic PNG encoder.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .config import ProjectConfig
from .imageio import load_image
from .projection import FovAlpha
from .raster import RasterImage, as_rgb8
from .registration import BlendPolicy, Rig, merge_views, tone_map_thermal
from .remap import BallView, VirtualCamera


@dataclass(frozen=True)
class ViewState:
    """Operator view: pinhole orientation/zoom plus the active layer policy."""

    yaw_deg: float = 0.0
    pitch_deg: float = 0.0
    roll_deg: float = 0.0
    hfov_deg: float = 60.0
    width: int = 640
    height: int = 480
    layer: BlendPolicy | None = None  # None: use the rig's policy
    alpha_overrides: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not -90.0 <= self.pitch_deg <= 90.0:
            raise ValueError(f"pitch outside [-90, 90]: {self.pitch_deg}")
        if not 0.0 < self.hfov_deg < 180.0:
            raise ValueError(f"hfov outside (0, 180): {self.hfov_deg}")
        if not (0 < self.width <= 8192 and 0 < self.height <= 8192):
            raise ValueError("frame dimensions outside (0, 8192]")
        for sid, alpha in self.alpha_overrides.items():
            FovAlpha(alpha)  # validates the range

    def camera(self) -> VirtualCamera:
        return VirtualCamera(
            yaw_deg=self.yaw_deg,
            pitch_deg=self.pitch_deg,
            roll_deg=self.roll_deg,
            hfov_deg=self.hfov_deg,
            out_width=self.width,
            out_height=self.height,
        )

    def to_json_dict(self) -> dict:
        doc = {
            "yaw_deg": self.yaw_deg,
            "pitch_deg": self.pitch_deg,
            "roll_deg": self.roll_deg,
            "hfov_deg": self.hfov_deg,
            "width": self.width,
            "height": self.height,
        }
        if self.layer is not None:
            layer: dict = {"policy": self.layer.policy}
            if self.layer.policy == "switch" and self.layer.active:
                layer["source"] = self.layer.active
            if self.layer.weights:
                layer["weights"] = dict(self.layer.weights)
            doc["layer"] = layer
        if self.alpha_overrides:
            doc["alpha_overrides"] = dict(self.alpha_overrides)
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ViewState":
        layer = None
        layer_doc = doc.get("layer")
        if layer_doc is not None:
            policy = layer_doc.get("policy", "switch")
            layer = BlendPolicy(
                policy=policy,
                weights={
                    k: float(v) for k, v in layer_doc.get("weights", {}).items()
                },
                active=layer_doc.get("source"),
            )
        return cls(
            yaw_deg=float(doc.get("yaw_deg", 0.0)),
            pitch_deg=float(doc.get("pitch_deg", 0.0)),
            roll_deg=float(doc.get("roll_deg", 0.0)),
            hfov_deg=float(doc.get("hfov_deg", 60.0)),
            width=int(doc.get("width", 640)),
            height=int(doc.get("height", 480)),
            layer=layer,
            alpha_overrides={
                k: float(v)
                for k, v in doc.get("alpha_overrides", {}).items()
            },
        )


def load_current_frames(config: ProjectConfig) -> dict[str, RasterImage]:
    """Latest frame per source (single images load as themselves)."""
    return {
        sid: load_image(paths[-1]) for sid, paths in config.load_frames().items()
    }


def views_from_frames(
    rig: Rig,
    frames: dict[str, RasterImage],
    alpha_overrides: dict[str, float] | None = None,
) -> list[BallView]:
    views = []
    for sid, frame in frames.items():
        src = rig.source(sid)
        fov = src.fov
        if alpha_overrides and sid in alpha_overrides:
            fov = FovAlpha(alpha_overrides[sid])
        views.append(
            BallView(image=frame, circle=src.circle, fov=fov, source_id=sid)
        )
    return views


def render_view_state(
    rig: Rig, frames: dict[str, RasterImage], state: ViewState
) -> RasterImage:
    """Merged pinhole render of the current frames for one view state.

    Output is display RGB (8-bit); switch layers that arrive as thermal or
    16-bit data go through the same display conversion the blend path uses.
    """
    policy = state.layer or rig.blend
    if policy.policy == "switch":
        active = policy.active or rig.reference
        rig.source(active)  # KeyError for unknown ids before any rendering
        frames = {active: frames[active]}
        if state.layer is None:
            policy = replace(rig.blend, active=active)
    views = views_from_frames(rig, frames, state.alpha_overrides)
    result = merge_views(rig, views, state.camera(), policy=policy)
    combined = result.combined
    if combined.channels == 1:
        combined = tone_map_thermal(combined)
    elif combined.bytes_per_sample != 1:
        combined = as_rgb8(combined)
    return combined
