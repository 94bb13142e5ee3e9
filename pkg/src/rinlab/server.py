"""Session server: HTTP session lifecycle + WebSocket event stream.

Each session serializes its events behind a lock (one writer); snapshots are
read from the last committed state, so concurrent reads never see a partial
update. Analytics errors surface as structured error messages and leave the
session state untouched.
"""
from __future__ import annotations

import json
import logging
import threading
import uuid
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.concurrency import run_in_threadpool

from .errors import InvalidPayload, RinLabError
from .layout import LayoutParams
from .rin import DistanceCriterion, RinConfig
from .session import (
    EventKind,
    MeasureSelector,
    SessionState,
    UpdateEvent,
    create_session,
    handle_event,
    snapshot,
)
from .trajectory import parse_pdb, parse_traj_json, select_protein_residues

log = logging.getLogger(__name__)


class Session:
    """One live session: committed state + event serialization lock."""

    def __init__(self, state: SessionState):
        self.state = state
        self.lock = threading.Lock()

    def apply(self, event: UpdateEvent) -> dict:
        with self.lock:
            new_state, _timing = handle_event(self.state, event)
            self.state = new_state
            return snapshot(new_state)

    def snapshot(self) -> dict:
        return snapshot(self.state)


def _parse_config(doc: dict) -> RinConfig:
    cfg = doc.get("config") or {}
    try:
        criterion = DistanceCriterion(cfg.get("criterion", "min"))
    except ValueError:
        raise InvalidPayload(f"unknown criterion {cfg.get('criterion')!r}") from None
    cutoff = cfg.get("cutoff", 4.5)
    if not isinstance(cutoff, (int, float)) or isinstance(cutoff, bool):
        raise InvalidPayload("config.cutoff must be a number")
    return RinConfig(criterion, float(cutoff),
                     bool(cfg.get("exclude_backbone_neighbors", False)))


def _load_trajectory(doc: dict, data_dir: Path | None):
    fmt = doc.get("format")
    if doc.get("trajectory") is not None:
        traj = parse_traj_json(json.dumps(doc["trajectory"]))
    elif doc.get("pdb_text") is not None:
        traj = parse_pdb(doc["pdb_text"])
    elif doc.get("path") is not None:
        if data_dir is None:
            raise InvalidPayload("server started without --data; path loading disabled")
        path = (data_dir / doc["path"]).resolve()
        if not str(path).startswith(str(data_dir.resolve())):
            raise InvalidPayload("path escapes the data directory")
        if not path.exists():
            raise InvalidPayload(f"no such file: {doc['path']}")
        raw = path.read_bytes()
        if fmt == "json" or (fmt is None and path.suffix == ".json"):
            traj = parse_traj_json(raw)
        else:
            traj = parse_pdb(raw)
    else:
        raise InvalidPayload("provide one of: trajectory, pdb_text, path")
    if doc.get("filter_protein", True):
        traj = select_protein_residues(
            traj,
            include_hydrogens=bool(doc.get("include_hydrogens", False)),
            permissive=bool(doc.get("permissive", False)),
        )
    return traj


def create_app(data_dir: str | Path | None = None,
               persist_dir: str | Path | None = None,
               static_dir: str | Path | None = None) -> FastAPI:
    data_path = Path(data_dir) if data_dir else None
    persist_path = Path(persist_dir) if persist_dir else None
    sessions: dict[str, Session] = {}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        if persist_path is not None:
            persist_path.mkdir(parents=True, exist_ok=True)
            for sid, sess in sessions.items():
                out = persist_path / f"session-{sid}.json"
                out.write_text(json.dumps(sess.snapshot()))

    app = FastAPI(title="rinlab session server", lifespan=lifespan)

    def _get(session_id: str) -> Session:
        sess = sessions.get(session_id)
        if sess is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return sess

    @app.post("/sessions")
    async def create(doc: dict):
        def build():
            traj = _load_trajectory(doc, data_path)
            config = _parse_config(doc)
            measure = MeasureSelector.from_token(
                doc.get("measure", "closeness"),
                gamma=float(doc.get("gamma", 1.0)),
                seed=int(doc.get("seed", 0)),
            )
            params = LayoutParams(seed=int(doc.get("layout_seed", 0)))
            return create_session(
                traj, config, measure,
                layout_params=params,
                warm_layouts=not bool(doc.get("cold_layouts", False)),
            )

        try:
            state = await run_in_threadpool(build)
        except (RinLabError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        session_id = uuid.uuid4().hex
        sessions[session_id] = Session(state)
        return {"session_id": session_id}

    @app.get("/sessions/{session_id}/snapshot")
    async def get_snapshot(session_id: str):
        return JSONResponse(_get(session_id).snapshot())

    @app.delete("/sessions/{session_id}")
    async def delete(session_id: str):
        _get(session_id)
        del sessions[session_id]
        return {"deleted": session_id}

    @app.websocket("/sessions/{session_id}/ws")
    async def websocket(ws: WebSocket, session_id: str):
        await ws.accept()
        sess = sessions.get(session_id)
        if sess is None:
            await ws.send_json({"type": "error", "code": "no_such_session",
                                "message": f"no session {session_id}"})
            await ws.close()
            return
        while True:
            try:
                raw = await ws.receive_text()
            except WebSocketDisconnect:
                return
            try:
                msg = json.loads(raw)
                kind = EventKind(msg.get("type"))
                event = UpdateEvent(kind, msg.get("value"))
            except (json.JSONDecodeError, ValueError):
                await ws.send_json({"type": "error", "code": "bad_message",
                                    "message": f"unparseable event: {raw[:200]}"})
                continue
            try:
                doc = await run_in_threadpool(sess.apply, event)
            except InvalidPayload as exc:
                await ws.send_json({"type": "error", "code": "invalid_payload",
                                    "message": str(exc)})
                continue
            except RinLabError as exc:
                await ws.send_json({"type": "error", "code": "compute_failed",
                                    "message": str(exc)})
                continue
            await ws.send_json(doc)

    static_path = Path(static_dir) if static_dir else None
    if static_path and static_path.is_dir():
        app.mount("/", StaticFiles(directory=static_path, html=True), name="ui")

    return app
