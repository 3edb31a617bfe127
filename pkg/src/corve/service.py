"""HTTP service: observe a live simulation and answer its requests.

Endpoints (all JSON):
  GET  /state                   agents, consents, chain edges, counters
  GET  /events                  server-sent event stream; ?after_seq resumes,
                                ?max_events bounds delivery then closes
  GET  /requests                pending re-consent/acknowledgment requests
  POST /requests/{id}/grant     answer a pending request
  POST /requests/{id}/deny
  POST /withdraw                {"human_id": ...} revokes that human's consent
  POST /control/start|pause|step  drive the scripted scenario

All simulation mutations serialize through one lock; the event stream reads
a shared append-only list, so a slow reader lags without buffering anything
per connection and can never block the engine. The simulation starts paused
and advances only on operator commands. Pending requests carry a wall-clock
deadline; an expired request resolves as an unanswered timeout (deny).
"""

from __future__ import annotations

import dataclasses
import json
import threading
import time
from typing import Iterator

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from .errors import AlreadyAnswered, DeadlineExpired, UnknownHuman, UnknownRequest
from .resources import load_profile, read_scenario_text
from .simulator import InteractiveOracle, ScenarioSpec, Simulation, load_scenario

KEEPALIVE_SECONDS = 15.0


class ServiceController:
    """Owns the simulation; every mutation happens under one condition lock."""

    def __init__(
        self,
        spec: ScenarioSpec,
        *,
        decision_budget_ms: float = 50.0,
        request_timeout: float = 600.0,
    ):
        self.spec = spec
        self.sim = Simulation(spec, InteractiveOracle())
        self.cond = threading.Condition()
        self.running = False
        self.decision_budget_ms = decision_budget_ms
        self.request_timeout = request_timeout
        self.request_views: dict[str, dict] = {}
        self.wall_deadlines: dict[str, float] = {}
        self.sim.subscribe(self._on_event)

    # -- engine plumbing (callers hold self.cond)

    def _on_event(self, event) -> None:
        if event.kind in ("ReConsentRequested", "Notified"):
            rid = event.payload["request_id"]
            self.request_views[rid] = event.payload
            self.wall_deadlines[rid] = time.monotonic() + self.request_timeout
        self.cond.notify_all()

    def _drain(self) -> int:
        steps = 0
        while self.running and self.sim.step():
            steps += 1
        return steps

    def _sweep_expired(self) -> None:
        now = time.monotonic()
        for rid, deadline in list(self.wall_deadlines.items()):
            req = self.sim.pending.get(rid)
            if req is None or req.terminal:
                del self.wall_deadlines[rid]
            elif now > deadline:
                del self.wall_deadlines[rid]
                self.sim.force_timeout(rid)
                self.sim.drain_immediate()

    # -- operator surface

    def control(self, verb: str) -> dict:
        with self.cond:
            if verb == "start":
                self.running = True
                self._drain()
            elif verb == "pause":
                self.running = False
            elif verb == "step":
                self.sim.step()
            else:
                raise ValueError(f"unknown control verb {verb!r}")
            return self.state()

    def state(self) -> dict:
        with self.cond:
            summary = self.sim.state_summary()
            summary["running"] = self.running
            summary["finished"] = self.sim.finished()
            summary["decision_budget_ms"] = self.decision_budget_ms
            summary["budget_ok"] = (
                summary["latency"]["p99_ms"] <= self.decision_budget_ms
            )
            return summary

    def pending_requests(self) -> list[dict]:
        with self.cond:
            self._sweep_expired()
            now = time.monotonic()
            views = []
            for req in self.sim.open_requests():
                view = dict(self.request_views.get(req.request_id, {}))
                view["request_id"] = req.request_id
                deadline = self.wall_deadlines.get(req.request_id)
                view["seconds_left"] = (
                    max(0.0, deadline - now) if deadline is not None else None
                )
                views.append(view)
            return views

    def answer(self, request_id: str, verdict: str, note: str = "") -> dict:
        with self.cond:
            req = self.sim.pending.get(request_id)
            if req is None:
                raise UnknownRequest(f"no request {request_id!r}")
            if req.terminal:
                raise AlreadyAnswered(f"request {request_id!r} already resolved")
            deadline = self.wall_deadlines.get(request_id)
            if deadline is not None and time.monotonic() > deadline:
                del self.wall_deadlines[request_id]
                self.sim.force_timeout(request_id)
                self.sim.drain_immediate()
                raise DeadlineExpired(
                    f"request {request_id!r} expired; recorded as timeout deny"
                )
            self.sim.schedule_answer(request_id, verdict, source=note or "operator")
            self.sim.drain_immediate()
            self._drain()
            return {"request_id": request_id, "verdict": verdict, "answered": True}

    def withdraw(self, human_id: str) -> dict:
        with self.cond:
            self.sim.inject_withdrawal(at=self.sim.now, human_id=human_id)
            self._drain()
            return {"human_id": human_id, "withdrawn": True}

    # -- event stream

    def events_since(self, after_seq: int) -> list:
        with self.cond:
            return [e for e in self.sim.events if e.seq > after_seq]

    def wait_for_events(self, after_seq: int, timeout: float) -> list:
        with self.cond:
            available = [e for e in self.sim.events if e.seq > after_seq]
            if available:
                return available
            self.cond.wait(timeout)
            return [e for e in self.sim.events if e.seq > after_seq]


def _sse(event) -> str:
    return f"id: {event.seq}\ndata: {event.to_json_line()}\n\n"


def build_app(controller: ServiceController) -> FastAPI:
    app = FastAPI(title="corve", docs_url=None, redoc_url=None)
    app.state.controller = controller
    # the console may be served from another local origin during development
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def error(status: int, exc: Exception) -> JSONResponse:
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/state")
    def get_state() -> dict:
        return controller.state()

    @app.get("/requests")
    def get_requests() -> dict:
        return {"pending": controller.pending_requests()}

    @app.post("/requests/{request_id}/grant")
    def post_grant(request_id: str, body: dict | None = None):
        return _answer(request_id, "grant", body)

    @app.post("/requests/{request_id}/deny")
    def post_deny(request_id: str, body: dict | None = None):
        return _answer(request_id, "deny", body)

    def _answer(request_id: str, verdict: str, body: dict | None):
        note = (body or {}).get("note", "")
        try:
            return controller.answer(request_id, verdict, note)
        except UnknownRequest as exc:
            return error(404, exc)
        except AlreadyAnswered as exc:
            return error(409, exc)
        except DeadlineExpired as exc:
            return error(410, exc)

    @app.post("/withdraw")
    def post_withdraw(body: dict):
        human_id = body.get("human_id")
        if not isinstance(human_id, str) or not human_id:
            return error(422, ValueError("body must carry a human_id string"))
        try:
            return controller.withdraw(human_id)
        except UnknownHuman as exc:
            return error(404, exc)

    @app.post("/control/{verb}")
    def post_control(verb: str):
        try:
            return controller.control(verb)
        except ValueError as exc:
            return error(404, exc)

    @app.get("/events")
    def get_events(
        request: Request, after_seq: int = -1, max_events: int | None = None
    ) -> StreamingResponse:
        def bounded() -> Iterator[str]:
            for event in controller.events_since(after_seq)[: max(0, max_events)]:
                yield _sse(event)

        def live() -> Iterator[str]:
            cursor = after_seq
            while True:
                batch = controller.wait_for_events(cursor, KEEPALIVE_SECONDS)
                if not batch:
                    yield ": keepalive\n\n"
                    continue
                for event in batch:
                    cursor = max(cursor, event.seq)
                    yield _sse(event)

        generator = bounded() if max_events is not None else live()
        return StreamingResponse(generator, media_type="text/event-stream")

    return app


def serve(
    scenario: str,
    profile: str | None = None,
    bind: str = "127.0.0.1:8733",
    decision_budget_ms: float = 50.0,
    request_timeout: float = 600.0,
) -> int:
    """Load a scenario and run the HTTP service until interrupted."""
    import uvicorn

    spec = load_scenario(read_scenario_text(scenario))
    if profile:
        spec = dataclasses.replace(spec, profile=load_profile(profile))
    controller = ServiceController(
        spec,
        decision_budget_ms=decision_budget_ms,
        request_timeout=request_timeout,
    )
    app = build_app(controller)
    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise ValueError(f"bind must look like host:port, got {bind!r}")
    print(
        json.dumps(
            {
                "scenario": spec.name,
                "profile": spec.profile.name,
                "bind": bind,
                "state": "paused; POST /control/start to begin",
            }
        )
    )
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    return 0
