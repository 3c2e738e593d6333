"""HTTP endpoints: session CRUD, commands, views, raw snapshots, event stream."""

import asyncio
import json

import httpx
import pytest
from fastapi.testclient import TestClient

import memtrace.server as server_module
from memtrace.server import TRACE_DIR_ENV, create_app, default_trace_root

from .corpus import LISTING1


@pytest.fixture
def app(tmp_path):
    return create_app(trace_root=tmp_path / "traces")


@pytest.fixture
def client(app):
    return TestClient(app)


def make_session(client, breakpoints=(10,)):
    response = client.post(
        "/sessions",
        json={"source": LISTING1.source, "dialect": "java", "breakpoints": list(breakpoints)},
    )
    assert response.status_code == 201
    return response.json()


# -- creation -----------------------------------------------------------------


def test_create_session(client, tmp_path):
    body = make_session(client)
    assert body["status"] == "paused"
    assert body["step"] == 0
    assert body["latestStep"] == 0
    assert body["view"]["language"] == "java"
    assert body["view"]["line"] == 4
    assert (tmp_path / "traces" / body["sessionId"] / "trace.meta.json").is_file()


def test_create_session_rejects_bad_source(client):
    response = client.post(
        "/sessions", json={"source": "class {", "dialect": "java", "breakpoints": []}
    )
    assert response.status_code == 422
    diagnostics = response.json()["detail"]["diagnostics"]
    assert len(diagnostics) == 1
    assert set(diagnostics[0]) == {"line", "column", "message"}


def test_create_session_rejects_unknown_dialect(client):
    response = client.post("/sessions", json={"source": "x", "dialect": "rust"})
    assert response.status_code == 422  # pydantic literal check


def test_breakpoint_diagnostics_have_positions(client):
    response = client.post(
        "/sessions",
        json={"source": LISTING1.source, "dialect": "java", "breakpoints": [2]},
    )
    assert response.status_code == 422
    (diag,) = response.json()["detail"]["diagnostics"]
    assert diag["line"] == 2


# -- info ------------------------------------------------------------------------


def test_session_info(client):
    sid = make_session(client)["sessionId"]
    response = client.get(f"/sessions/{sid}")
    assert response.status_code == 200
    info = response.json()
    assert info["sessionId"] == sid
    assert info["dialect"] == "java"
    assert info["breakpoints"] == [10]
    assert info["stepCount"] == 1
    assert info["error"] is None
    assert info["source"] == LISTING1.source


def test_unknown_session_is_404(client):
    assert client.get("/sessions/missing").status_code == 404
    response = client.post("/sessions/missing/command", json={"action": "stepInto"})
    assert response.status_code == 404
    assert "unknown session: missing" in response.json()["detail"]


# -- commands ---------------------------------------------------------------------


def test_command_round_trip(client):
    sid = make_session(client)["sessionId"]
    response = client.post(f"/sessions/{sid}/command", json={"action": "run"})
    assert response.status_code == 200
    body = response.json()
    assert body["step"] == 6
    assert body["view"]["line"] == 10
    assert body["status"] == "paused"


def test_invalid_action_rejected_by_schema(client):
    sid = make_session(client)["sessionId"]
    response = client.post(f"/sessions/{sid}/command", json={"action": "teleport"})
    assert response.status_code == 422


def test_state_conflicts_are_409(client):
    sid = make_session(client)["sessionId"]
    response = client.post(f"/sessions/{sid}/command", json={"action": "backStep"})
    assert response.status_code == 409
    assert "already at the first step" in response.json()["detail"]

    client.post(f"/sessions/{sid}/command", json={"action": "run"})
    client.post(f"/sessions/{sid}/command", json={"action": "backStep"})
    response = client.post(f"/sessions/{sid}/command", json={"action": "stepInto"})
    assert response.status_code == 409
    assert "navigate to latest first" in response.json()["detail"]


def test_jump_with_argument(client):
    sid = make_session(client)["sessionId"]
    client.post(f"/sessions/{sid}/command", json={"action": "run"})
    response = client.post(f"/sessions/{sid}/command", json={"action": "jump", "arg": 3})
    assert response.status_code == 200
    assert response.json()["step"] == 3
    response = client.post(f"/sessions/{sid}/command", json={"action": "jump"})
    assert response.status_code == 409


# -- views ------------------------------------------------------------------------


def test_view_with_step_and_pref_overrides(client):
    sid = make_session(client)["sessionId"]
    client.post(f"/sessions/{sid}/command", json={"action": "run"})
    response = client.get(f"/sessions/{sid}/view", params={"step": 0})
    assert response.status_code == 200
    assert response.json()["step"] == 0

    response = client.get(
        f"/sessions/{sid}/view",
        params={"step": 6, "filterHeap": "false", "autoMinimize": "true"},
    )
    prefs = response.json()["view"]["prefs"]
    assert prefs["filterHeap"] is False
    assert prefs["autoMinimize"] is True


def test_view_out_of_range_is_409(client):
    sid = make_session(client)["sessionId"]
    assert client.get(f"/sessions/{sid}/view", params={"step": 9}).status_code == 409


# -- raw snapshots -------------------------------------------------------------------


def test_snapshot_served_verbatim(client, app):
    sid = make_session(client)["sessionId"]
    client.post(f"/sessions/{sid}/command", json={"action": "run"})
    response = client.get(f"/sessions/{sid}/snapshot/6")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/json")
    stored = app.state.manager.get(sid).trace.raw(6)
    assert response.text == stored
    # canonical form: two-space indent, trailing newline
    assert response.text.startswith('{\n  "language": "java"')
    assert response.text.endswith("}\n")


def test_snapshot_out_of_range_is_404(client):
    sid = make_session(client)["sessionId"]
    assert client.get(f"/sessions/{sid}/snapshot/5").status_code == 404


# -- event stream ---------------------------------------------------------------------
#
# The portal-backed test client buffers whole responses, so it cannot
# interleave commands with an open stream. These tests drive the ASGI app
# directly on one event loop: the stream runs as a task while commands are
# posted through an in-process transport.


class EventStream:
    """A live GET /sessions/{id}/events request against the raw ASGI app."""

    def __init__(self, app, session_id: str, limit: int):
        self.app = app
        self.scope = {
            "type": "http",
            "asgi": {"version": "3.0", "spec_version": "2.3"},
            "http_version": "1.1",
            "method": "GET",
            "scheme": "http",
            "path": f"/sessions/{session_id}/events",
            "raw_path": f"/sessions/{session_id}/events".encode(),
            "query_string": f"limit={limit}".encode(),
            "root_path": "",
            "headers": [(b"host", b"testserver")],
            "client": ("testclient", 50000),
            "server": ("testserver", 80),
        }
        self.chunks: asyncio.Queue = asyncio.Queue()
        self.started: dict = {}
        self._disconnect = asyncio.Event()
        self.task = None

    async def _receive(self):
        await self._disconnect.wait()
        return {"type": "http.disconnect"}

    async def _send(self, message):
        if message["type"] == "http.response.start":
            self.started = message
        elif message["type"] == "http.response.body":
            body = message.get("body", b"")
            if body:
                self.chunks.put_nowait(body.decode())

    async def __aenter__(self):
        self.task = asyncio.create_task(self.app(self.scope, self._receive, self._send))
        return self

    async def __aexit__(self, *exc):
        self._disconnect.set()
        await asyncio.wait_for(self.task, 5)

    async def next_chunk(self) -> str:
        return await asyncio.wait_for(self.chunks.get(), 5)


def sse_events(chunks):
    """Collect (event, payload) pairs from raw SSE chunks."""
    events = []
    current_event = None
    for line in "".join(chunks).splitlines():
        if line.startswith("event: "):
            current_event = line[len("event: ") :]
        elif line.startswith("data: "):
            events.append((current_event, json.loads(line[len("data: ") :])))
    return events


def asgi_poster(app):
    return httpx.AsyncClient(
        transport=httpx.ASGITransport(app=app), base_url="http://testserver"
    )


def test_events_mirror_command_payloads(client, app):
    sid = make_session(client)["sessionId"]

    async def scenario():
        async with asgi_poster(app) as poster:
            async with EventStream(app, sid, limit=2) as stream:
                assert await stream.next_chunk() == ": connected\n\n"
                first = (
                    await poster.post(f"/sessions/{sid}/command", json={"action": "stepInto"})
                ).json()
                second = (
                    await poster.post(f"/sessions/{sid}/command", json={"action": "backStep"})
                ).json()
                chunks = [await stream.next_chunk(), await stream.next_chunk()]
            headers = dict(stream.started["headers"])
            assert headers[b"content-type"].startswith(b"text/event-stream")
            return sse_events(chunks), first, second

    events, first, second = asyncio.run(scenario())
    assert [name for name, _ in events] == ["step", "step"]
    assert events[0][1] == first
    assert events[1][1] == second


def test_events_for_unknown_session(client):
    assert client.get("/sessions/nope/events", params={"limit": 1}).status_code == 404


def test_keepalive_comments(client, app, monkeypatch):
    monkeypatch.setattr(server_module, "KEEPALIVE_SECONDS", 0.05)
    sid = make_session(client)["sessionId"]

    async def scenario():
        async with asgi_poster(app) as poster:
            async with EventStream(app, sid, limit=1) as stream:
                assert await stream.next_chunk() == ": connected\n\n"
                assert await stream.next_chunk() == ": keep-alive\n\n"
                await poster.post(f"/sessions/{sid}/command", json={"action": "stepInto"})
                while True:
                    chunk = await stream.next_chunk()
                    if chunk.startswith("event: step"):
                        return chunk

    data_chunk = asyncio.run(scenario())
    assert "data: " in data_chunk


def test_subscribers_cleaned_up_after_stream(client, app):
    sid = make_session(client)["sessionId"]

    async def scenario():
        async with asgi_poster(app) as poster:
            async with EventStream(app, sid, limit=1) as stream:
                await stream.next_chunk()  # connected
                during = len(app.state.subscribers[sid])
                await poster.post(f"/sessions/{sid}/command", json={"action": "stepInto"})
                await stream.next_chunk()  # the event; generator then closes
            return during

    during = asyncio.run(scenario())
    assert during == 1
    assert len(app.state.subscribers[sid]) == 0


# -- configuration ---------------------------------------------------------------------


def test_default_trace_root_env(monkeypatch):
    monkeypatch.delenv(TRACE_DIR_ENV, raising=False)
    assert str(default_trace_root()) == "traces"
    monkeypatch.setenv(TRACE_DIR_ENV, "/tmp/elsewhere")
    assert str(default_trace_root()) == "/tmp/elsewhere"


def test_static_dir_mounted_when_present(tmp_path):
    static = tmp_path / "ui"
    static.mkdir()
    (static / "index.html").write_text("<!doctype html><title>dbg</title>")
    app = create_app(trace_root=tmp_path / "traces", static_dir=static)
    client = TestClient(app)
    response = client.get("/")
    assert response.status_code == 200
    assert "dbg" in response.text
    # API routes still take precedence over the mount
    assert client.post(
        "/sessions",
        json={"source": LISTING1.source, "dialect": "java", "breakpoints": []},
    ).status_code == 201


def test_missing_static_dir_ignored(tmp_path):
    app = create_app(trace_root=tmp_path / "traces", static_dir=tmp_path / "absent")
    client = TestClient(app)
    assert client.get("/").status_code == 404
