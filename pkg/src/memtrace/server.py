"""HTTP front door: session management, command dispatch, views, and a push channel.

Every state change flows through POST /sessions/{id}/command; the same payload
the caller receives is also pushed to every subscriber on the events channel,
so all attached clients stay in lockstep.
"""

from __future__ import annotations

import asyncio
import json
import os
from pathlib import Path
from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .session import (
    SessionCreateError,
    SessionManager,
    SessionStateError,
    UnknownSessionError,
)

TRACE_DIR_ENV = "MEMTRACE_TRACE_DIR"
KEEPALIVE_SECONDS = 15.0


class CreateSessionRequest(BaseModel):
    source: str
    dialect: Literal["java", "cpp"]
    breakpoints: list[int] = Field(default_factory=list)


class CommandRequest(BaseModel):
    action: Literal[
        "run", "stepInto", "stepOver", "stepReturn", "backStep", "forwardStep", "jump"
    ]
    arg: Optional[int] = None


class SessionViewResponse(BaseModel):
    sessionId: str
    status: str
    latestStep: int
    step: int
    view: dict
    diff: dict


class SessionInfoResponse(BaseModel):
    sessionId: str
    dialect: str
    status: str
    breakpoints: list[int]
    step: int
    latestStep: int
    stepCount: int
    implicitSteps: list[int]
    error: Optional[str]
    source: str


def default_trace_root() -> Path:
    return Path(os.environ.get(TRACE_DIR_ENV, "traces"))


def create_app(trace_root=None, static_dir=None) -> FastAPI:
    app = FastAPI(title="memtrace", version="0.1.0")
    manager = SessionManager(trace_root if trace_root is not None else default_trace_root())
    app.state.manager = manager
    app.state.subscribers = {}  # session_id -> set[asyncio.Queue]

    def _broadcast(session_id: str, payload: dict):
        for queue in app.state.subscribers.get(session_id, set()):
            queue.put_nowait(payload)

    @app.post("/sessions", response_model=SessionViewResponse, status_code=201)
    async def create_session(request: CreateSessionRequest):
        try:
            session = manager.create_session(
                request.source, request.dialect, request.breakpoints
            )
        except SessionCreateError as exc:
            raise HTTPException(status_code=422, detail={"diagnostics": exc.diagnostics})
        return manager.view(session.id)

    @app.get("/sessions/{session_id}", response_model=SessionInfoResponse)
    async def session_info(session_id: str):
        try:
            return manager.info(session_id)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/sessions/{session_id}/command", response_model=SessionViewResponse)
    async def session_command(session_id: str, request: CommandRequest):
        try:
            payload = manager.command(session_id, request.action, request.arg)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except SessionStateError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        _broadcast(session_id, payload)
        return payload

    @app.get("/sessions/{session_id}/view", response_model=SessionViewResponse)
    async def session_view(
        session_id: str,
        step: Optional[int] = None,
        filterHeap: Optional[bool] = None,
        autoMinimize: Optional[bool] = None,
    ):
        try:
            return manager.view(
                session_id, step=step, filter_heap=filterHeap, auto_minimize=autoMinimize
            )
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except SessionStateError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.get("/sessions/{session_id}/snapshot/{step}")
    async def session_snapshot(session_id: str, step: int):
        try:
            text = manager.snapshot_text(session_id, step)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except SessionStateError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        # stored file text verbatim, not re-serialized
        return PlainTextResponse(text, media_type="application/json")

    @app.get("/sessions/{session_id}/events")
    async def session_events(session_id: str, limit: Optional[int] = None):
        try:
            manager.get(session_id)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        queue: asyncio.Queue = asyncio.Queue()
        app.state.subscribers.setdefault(session_id, set()).add(queue)

        async def stream():
            sent = 0
            try:
                yield ": connected\n\n"
                while limit is None or sent < limit:
                    try:
                        payload = await asyncio.wait_for(queue.get(), KEEPALIVE_SECONDS)
                    except asyncio.TimeoutError:
                        yield ": keep-alive\n\n"
                        continue
                    yield f"event: step\ndata: {json.dumps(payload)}\n\n"
                    sent += 1
            finally:
                app.state.subscribers.get(session_id, set()).discard(queue)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
