"""Project configuration: the persisted rig plus inputs, outputs and service."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .registration import Rig

CONFIG_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class InputSpec:
    """Where a source's frames come from: one image or a numbered sequence."""

    path: str | None = None
    directory: str | None = None
    pattern: str = "*.png"

    def __post_init__(self):
        if (self.path is None) == (self.directory is None):
            raise ValueError("input needs exactly one of 'path' or 'dir'")

    def resolve_frames(self, base: Path) -> list[Path]:
        """Frame files in playback order; raises if nothing resolves."""
        if self.path is not None:
            p = (base / self.path).resolve()
            if not p.is_file():
                raise FileNotFoundError(f"input image not found: {p}")
            return [p]
        d = (base / self.directory).resolve()
        frames = sorted(d.glob(self.pattern))
        if not frames:
            raise FileNotFoundError(
                f"no frames matching {self.pattern!r} under {d}"
            )
        return frames


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8750


@dataclass(frozen=True)
class OutputConfig:
    width: int = 1024
    height: int = 512


@dataclass(frozen=True)
class ProjectConfig:
    """Everything a run needs: rig, per-source inputs, outputs, service."""

    rig: Rig
    inputs: dict[str, InputSpec]
    output: OutputConfig = field(default_factory=OutputConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)
    base_dir: Path = field(default_factory=Path, compare=False)

    def __post_init__(self):
        rig_ids = set(self.rig.source_ids())
        for sid in self.inputs:
            if sid not in rig_ids:
                raise ValueError(f"input for unknown rig source {sid!r}")

    def to_json_dict(self) -> dict:
        inputs = {}
        for sid, spec in self.inputs.items():
            if spec.path is not None:
                inputs[sid] = {"path": spec.path}
            else:
                inputs[sid] = {"dir": spec.directory, "pattern": spec.pattern}
        return {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "rig": self.rig.to_json_dict(),
            "inputs": inputs,
            "output": {"width": self.output.width, "height": self.output.height},
            "service": {"host": self.service.host, "port": self.service.port},
        }

    @classmethod
    def from_json_dict(cls, doc: dict, base_dir: Path = Path()) -> "ProjectConfig":
        version = doc.get("schema_version")
        if version != CONFIG_SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema version {version!r}")
        inputs = {}
        for sid, spec in doc.get("inputs", {}).items():
            inputs[sid] = InputSpec(
                path=spec.get("path"),
                directory=spec.get("dir"),
                pattern=spec.get("pattern", "*.png"),
            )
        out_doc = doc.get("output", {})
        svc_doc = doc.get("service", {})
        return cls(
            rig=Rig.from_json_dict(doc["rig"]),
            inputs=inputs,
            output=OutputConfig(
                width=int(out_doc.get("width", 1024)),
                height=int(out_doc.get("height", 512)),
            ),
            service=ServiceConfig(
                host=svc_doc.get("host", "127.0.0.1"),
                port=int(svc_doc.get("port", 8750)),
            ),
            base_dir=base_dir,
        )

    def save(self, path) -> None:
        path = Path(path)
        path.write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path, check_paths: bool = True) -> "ProjectConfig":
        """Read a config document; inputs resolve relative to its directory."""
        path = Path(path)
        doc = json.loads(path.read_text())
        config = cls.from_json_dict(doc, base_dir=path.parent)
        if check_paths:
            for spec in config.inputs.values():
                spec.resolve_frames(config.base_dir)
        return config

    def load_frames(self) -> dict[str, list[Path]]:
        return {
            sid: spec.resolve_frames(self.base_dir)
            for sid, spec in self.inputs.items()
        }
