"""WebSocket streaming service.

One duplex connection per session: binary messages carry frames, text
messages carry JSON control. Binary layout (little-endian): magic "SPVF",
msg_type u8 (1 = input frame, 2 = percept, 3 = mask), frame_id u32,
width u16, height u16, then width*height payload bytes (8-bit luminance).

Frames are processed latest-wins: if a new frame arrives while one is
still being processed, the older queued frame is dropped and counted.
"""

from __future__ import annotations

import asyncio
import copy
import itertools
import json
import struct
import time
from dataclasses import dataclass, field, replace

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import config_from_doc, config_to_doc
from .errors import ValidationError
from .pipeline import PipelineConfig, PipelineState, build_pipeline, process_frame, update_config
from .scenes import SCENES, scene_frame
from .vision import Frame, GazeTransform, PreprocessMode

FRAME_HEADER = struct.Struct("<4sBIHH")
FRAME_MAGIC = b"SPVF"
MSG_INPUT = 1
MSG_PERCEPT = 2
MSG_MASK = 3

SCENE_ID_BASE = 1_000_000

_session_ids = itertools.count(1)


def pack_frame(msg_type: int, frame_id: int, frame: Frame) -> bytes:
    payload = np.round(frame.data * 255.0).astype(np.uint8).tobytes()
    return FRAME_HEADER.pack(FRAME_MAGIC, msg_type, frame_id, frame.width, frame.height) + payload


def unpack_frame(buf: bytes) -> tuple[int, int, Frame]:
    """Parse a binary frame message; raises ValidationError on any defect."""
    if len(buf) < FRAME_HEADER.size:
        raise ValidationError(f"frame message too short ({len(buf)} bytes)")
    magic, msg_type, frame_id, width, height = FRAME_HEADER.unpack_from(buf)
    if magic != FRAME_MAGIC:
        raise ValidationError(f"bad frame magic {magic!r}")
    if msg_type not in (MSG_INPUT, MSG_PERCEPT, MSG_MASK):
        raise ValidationError(f"unknown frame msg_type {msg_type}")
    payload = buf[FRAME_HEADER.size :]
    if width < 1 or height < 1 or len(payload) != width * height:
        raise ValidationError(
            f"payload length {len(payload)} != {width}x{height}"
        )
    data = np.frombuffer(payload, dtype=np.uint8).reshape(height, width) / 255.0
    return msg_type, frame_id, Frame(data)


@dataclass
class Session:
    """Per-connection state: one pipeline, gaze, and traffic counters."""

    state: PipelineState
    doc: dict
    session_id: int = field(default_factory=lambda: next(_session_ids))
    gaze: GazeTransform = field(default_factory=GazeTransform)
    frames_in: int = 0
    frames_out: int = 0
    dropped: int = 0
    last_timings_us: dict = field(default_factory=dict)
    sent_at: list = field(default_factory=list)

    def fps(self) -> float:
        now = time.monotonic()
        recent = [t for t in self.sent_at if now - t <= 2.0]
        self.sent_at = recent
        return len(recent) / 2.0 if recent else 0.0


def _stats_message(session: Session) -> dict:
    return {
        "type": "stats",
        "session_id": session.session_id,
        "frames_in": session.frames_in,
        "frames_out": session.frames_out,
        "dropped": session.dropped,
        "generation": session.state.generation,
        "fps": session.fps(),
        "timings_us": session.last_timings_us,
    }


def _deep_merge(base: dict, patch: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in patch.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = v
    return out


class _LatestSlot:
    """One-slot buffer: putting over an unconsumed item replaces it."""

    def __init__(self):
        self._item = None
        self._event = asyncio.Event()

    def put(self, item) -> bool:
        """Store item; returns True if an unconsumed item was displaced."""
        displaced = self._item is not None
        self._item = item
        self._event.set()
        return displaced

    async def get(self):
        await self._event.wait()
        item = self._item
        self._item = None
        self._event.clear()
        return item


async def _handle_control(ws: WebSocket, session: Session, msg: dict, send_lock) -> None:
    kind = msg.get("type")
    if kind == "set_config":
        patch = msg.get("config")
        if not isinstance(patch, dict):
            await _send_error(ws, send_lock, "bad_config", "set_config requires a config object")
            return
        doc = _deep_merge(session.doc, patch)
        try:
            cfg = config_from_doc(doc)
            new_state = await asyncio.to_thread(update_config, session.state, cfg)
        except ValidationError as exc:
            await _send_error(ws, send_lock, "bad_config", str(exc))
            return
        session.state = new_state
        session.doc = doc
        async with send_lock:
            await ws.send_json(
                {
                    "type": "ack",
                    "op": "set_config",
                    "config": doc,
                    "generation": new_state.generation,
                }
            )
    elif kind == "set_gaze":
        try:
            session.gaze = GazeTransform(
                float(msg.get("dx_deg", 0.0)),
                float(msg.get("dy_deg", 0.0)),
                float(msg.get("rot_deg", 0.0)),
            )
        except (TypeError, ValueError) as exc:
            await _send_error(ws, send_lock, "bad_gaze", str(exc))
            return
        async with send_lock:
            await ws.send_json({"type": "ack", "op": "set_gaze"})
    elif kind == "get_stats":
        async with send_lock:
            await ws.send_json(_stats_message(session))
    elif kind == "select_scene":
        scene = msg.get("scene")
        if scene != "off" and scene not in SCENES:
            await _send_error(ws, send_lock, "bad_scene", f"unknown scene {scene!r}")
            return
        session.scene = scene  # picked up by the scene task
        session.scene_fps = float(msg.get("fps", 10.0))
        async with send_lock:
            await ws.send_json({"type": "ack", "op": "select_scene", "scene": scene})
    else:
        await _send_error(ws, send_lock, "bad_control", f"unknown control type {kind!r}")


async def _send_error(ws: WebSocket, send_lock, code: str, detail: str) -> None:
    async with send_lock:
        await ws.send_json({"type": "error", "code": code, "detail": detail})


async def _frame_worker(ws: WebSocket, session: Session, slot: _LatestSlot, send_lock) -> None:
    while True:
        frame_id, frame = await slot.get()
        state, gaze = session.state, session.gaze
        report = await asyncio.to_thread(process_frame, state, frame, gaze)
        session.last_timings_us = {
            "preprocess": report.preprocess_us,
            "encode": report.encode_us,
            "render": report.render_us,
        }
        session.frames_out += 1
        session.sent_at.append(time.monotonic())
        async with send_lock:
            await ws.send_bytes(pack_frame(MSG_PERCEPT, frame_id, report.percept))


async def _scene_worker(ws: WebSocket, session: Session, send_lock) -> None:
    next_id = SCENE_ID_BASE
    t0 = time.monotonic()
    while True:
        scene = getattr(session, "scene", "off")
        if scene == "off":
            await asyncio.sleep(0.05)
            continue
        t = time.monotonic() - t0
        frame = scene_frame(scene, t)
        report = await asyncio.to_thread(process_frame, session.state, frame, session.gaze)
        session.frames_out += 1
        session.sent_at.append(time.monotonic())
        async with send_lock:
            await ws.send_bytes(pack_frame(MSG_INPUT, next_id, frame))
            await ws.send_bytes(pack_frame(MSG_PERCEPT, next_id, report.percept))
        next_id += 1
        await asyncio.sleep(1.0 / max(getattr(session, "scene_fps", 10.0), 0.1))


def create_app(config: PipelineConfig | None = None) -> FastAPI:
    base_config = config if config is not None else PipelineConfig()
    app = FastAPI(title="spvsim stream service")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        state = await asyncio.to_thread(build_pipeline, base_config)
        session = Session(state=state, doc=config_to_doc(base_config))
        send_lock = asyncio.Lock()
        await ws.send_json(
            {
                "type": "hello",
                "session_id": session.session_id,
                "config": session.doc,
                "generation": session.state.generation,
            }
        )
        slot = _LatestSlot()
        worker = asyncio.create_task(_frame_worker(ws, session, slot, send_lock))
        scenes = asyncio.create_task(_scene_worker(ws, session, send_lock))
        try:
            while True:
                msg = await ws.receive()
                if msg["type"] == "websocket.disconnect":
                    break
                if msg.get("bytes") is not None:
                    try:
                        msg_type, frame_id, frame = unpack_frame(msg["bytes"])
                    except ValidationError as exc:
                        await _send_error(ws, send_lock, "bad_frame", str(exc))
                        continue
                    if msg_type == MSG_MASK:
                        # switches preprocessing to mask mode with this frame;
                        # later set_config messages override it
                        pre = PreprocessMode("mask", mask=frame)
                        cfg = replace(session.state.config, preprocess=pre)
                        session.state = update_config(session.state, cfg)
                        continue
                    session.frames_in += 1
                    if slot.put((frame_id, frame)):
                        session.dropped += 1
                elif msg.get("text") is not None:
                    try:
                        control = json.loads(msg["text"])
                    except ValueError as exc:
                        await _send_error(ws, send_lock, "bad_control", str(exc))
                        continue
                    await _handle_control(ws, session, control, send_lock)
        except WebSocketDisconnect:
            pass
        finally:
            worker.cancel()
            scenes.cancel()

    return app
