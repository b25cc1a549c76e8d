"""HTTP/WebSocket service steering the live projection.

Endpoints (all JSON unless noted), versioned under /api:

  GET  /api/rig        current rig document
  PUT  /api/rig        replace the rig; 400 when rotations fail validation
  POST /api/register   {"a_source", "b_source", "pairs": [{"a": [x, y],
                       "b": [x, y]}, ...]} in source-pixel coordinates;
                       responds {"rotation": [9 floats], "residual_deg": r}
  GET  /api/frame?view=<ViewState JSON>   PNG of the merged pinhole render
  WS   /api/stream     client sends ViewState JSON; server replies with
                       binary frames: little-endian header (u32 seq, u16
                       width, u16 height, u8 channels) followed by row-major
                       8-bit pixels.

The stream coalesces: while a frame renders, newer view states overwrite
each other and only the latest is rendered next, so a panning operator
always gets the freshest view rather than a backlog. Rig replacement swaps
one reference atomically; every frame renders against a single rig
snapshot.
"""

from __future__ import annotations

import asyncio
import json
import struct

from aiohttp import WSMsgType, web

from .config import ProjectConfig
from .imageio import encode_png
from .projection import DiskPoint
from .registration import (
    Correspondence,
    Rig,
    estimate_rotation,
    rays_from_correspondences,
)
from .render import ViewState, load_current_frames, render_view_state
from .rotation import DegenerateRaysError

FRAME_HEADER = struct.Struct("<IHHB")


class ServiceState:
    """Mutable service state: the rig reference swaps atomically on PUT."""

    def __init__(self, config: ProjectConfig):
        self.config = config
        self.rig = config.rig
        self.frames = load_current_frames(config)

    def render(self, state: ViewState):
        rig = self.rig  # one snapshot per frame
        return render_view_state(rig, self.frames, state)


STATE_KEY = web.AppKey("state", ServiceState)


def _error(status: int, message: str) -> web.Response:
    return web.json_response({"error": message}, status=status)


def _parse_view_state(doc) -> ViewState:
    if not isinstance(doc, dict):
        raise ValueError("view state must be a JSON object")
    return ViewState.from_json_dict(doc)


async def handle_get_rig(request: web.Request) -> web.Response:
    state: ServiceState = request.app[STATE_KEY]
    return web.json_response(state.rig.to_json_dict())


async def handle_put_rig(request: web.Request) -> web.Response:
    state: ServiceState = request.app[STATE_KEY]
    try:
        doc = await request.json()
    except json.JSONDecodeError:
        return _error(400, "rig payload is not valid JSON")
    try:
        rig = Rig.from_json_dict(doc)
    except (ValueError, KeyError, TypeError) as exc:
        return _error(400, f"invalid rig: {exc}")
    missing = [sid for sid in state.frames if sid not in rig.source_ids()]
    if missing:
        return _error(400, f"rig drops configured sources: {missing}")
    state.rig = rig
    return web.json_response(rig.to_json_dict())


async def handle_register(request: web.Request) -> web.Response:
    state: ServiceState = request.app[STATE_KEY]
    try:
        doc = await request.json()
    except json.JSONDecodeError:
        return _error(400, "register payload is not valid JSON")
    rig = state.rig
    try:
        src_a = rig.source(doc["a_source"])
        src_b = rig.source(doc["b_source"])
    except KeyError as exc:
        return _error(404, f"unknown source id: {exc}")
    try:
        pairs = []
        for item in doc.get("pairs", []):
            ax, ay = (float(v) for v in item["a"])
            bx, by = (float(v) for v in item["b"])
            pairs.append(
                Correspondence(
                    DiskPoint(
                        (ax - src_a.circle.cx) / src_a.circle.r_px,
                        (src_a.circle.cy - ay) / src_a.circle.r_px,
                    ),
                    DiskPoint(
                        (bx - src_b.circle.cx) / src_b.circle.r_px,
                        (src_b.circle.cy - by) / src_b.circle.r_px,
                    ),
                )
            )
        rays_a, rays_b = rays_from_correspondences(pairs, src_a.fov, src_b.fov)
        rotation, residual = estimate_rotation(rays_a, rays_b)
    except (DegenerateRaysError, ValueError, KeyError, TypeError) as exc:
        return _error(400, f"invalid correspondences: {exc}")
    return web.json_response(
        {"rotation": rotation.rows(), "residual_deg": residual}
    )


async def handle_frame(request: web.Request) -> web.Response:
    state: ServiceState = request.app[STATE_KEY]
    raw = request.query.get("view", "{}")
    try:
        view = _parse_view_state(json.loads(raw))
    except (json.JSONDecodeError, ValueError) as exc:
        return _error(400, f"invalid view state: {exc}")
    try:
        image = await asyncio.get_running_loop().run_in_executor(
            None, state.render, view
        )
    except KeyError as exc:
        return _error(404, f"unknown source id: {exc}")
    return web.Response(body=encode_png(image), content_type="image/png")


async def handle_stream(request: web.Request) -> web.WebSocketResponse:
    state: ServiceState = request.app[STATE_KEY]
    ws = web.WebSocketResponse()
    await ws.prepare(request)

    latest: dict = {}
    wakeup = asyncio.Event()
    loop = asyncio.get_running_loop()

    async def renderer():
        seq = 0
        while True:
            await wakeup.wait()
            wakeup.clear()
            view = latest.get("view")
            if view is None:
                continue
            try:
                image = await loop.run_in_executor(None, state.render, view)
            except KeyError as exc:
                await ws.send_json({"error": f"unknown source id: {exc}"})
                continue
            seq += 1
            header = FRAME_HEADER.pack(
                seq, image.width, image.height, image.channels
            )
            await ws.send_bytes(header + image.data.tobytes())

    render_task = asyncio.create_task(renderer())
    try:
        async for msg in ws:
            if msg.type == WSMsgType.TEXT:
                try:
                    latest["view"] = _parse_view_state(json.loads(msg.data))
                except (json.JSONDecodeError, ValueError) as exc:
                    await ws.send_json({"error": f"invalid view state: {exc}"})
                    continue
                wakeup.set()
            elif msg.type == WSMsgType.ERROR:
                break
    finally:
        render_task.cancel()
    return ws


def build_app(config: ProjectConfig) -> web.Application:
    app = web.Application()
    app[STATE_KEY] = ServiceState(config)
    app.router.add_get("/api/rig", handle_get_rig)
    app.router.add_put("/api/rig", handle_put_rig)
    app.router.add_post("/api/register", handle_register)
    app.router.add_get("/api/frame", handle_frame)
    app.router.add_get("/api/stream", handle_stream)
    return app


def serve(config: ProjectConfig, host: str | None = None, port: int | None = None):
    """Run the service until interrupted (blocking entry for the CLI)."""
    app = build_app(config)
    web.run_app(
        app,
        host=host or config.service.host,
        port=port or config.service.port,
    )
