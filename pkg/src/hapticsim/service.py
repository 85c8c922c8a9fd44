"""Realtime WebSocket service around one teleoperation session.

The control loop runs in its own thread at the configured rate; the
event loop only handles connections and telemetry.  All data crossing
the boundary goes through lock-guarded buffers that the loop writes
without ever waiting on a client: snapshots coalesce (latest state
wins, stroke deltas accumulate losslessly) and each client drains its
own bounded outbox, so a stalled socket drops its oldest frames instead
of slowing the loop.

Roles: every connection starts as an observer.  The first client whose
``session_ctl{start}`` arrives while the controller seat is empty takes
it and becomes the live stylus source; everyone else watches.  When the
controller disconnects mid-run the loop pauses and the seat reopens.
"""

from __future__ import annotations

import asyncio
import contextlib
import threading
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles

from .config import ConfigError, ScenarioConfig, config_from_dict, scenario
from .metrics import HUMAN_EXTREMUM_N, HUMAN_MEAN_N, board_axis
from .operator import LiveOperator
from .reporting import strokes_to_svg
from .session import StepSnapshot, TeleopSession
from .wire import (
    WIRE_VERSION,
    ErrorMessage,
    MetricsUpdate,
    RoleAssign,
    ScenarioSet,
    ScenarioState,
    SessionCtl,
    SessionEvent,
    StateSnapshot,
    StylusInput,
    WireError,
    WireMessage,
    decode_message,
    encode_message,
)

SNAPSHOT_HZ = 60.0
METRICS_PERIOD_S = 0.5
CLIENT_OUTBOX_LIMIT = 256
SERVICE_VERSION = "0.1.0"


@dataclass
class _Client:
    uid: int
    ws: WebSocket
    role: str = "observer"
    outbox: asyncio.Queue = field(
        default_factory=lambda: asyncio.Queue(maxsize=CLIENT_OUTBOX_LIMIT))
    sender: asyncio.Task | None = None


class SessionService:
    """Session lifecycle, role arbitration, and telemetry fan-out."""

    def __init__(self, config: ScenarioConfig, real_time: bool = True):
        self.config = config
        self.real_time = real_time

        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._pause = threading.Event()
        self._thread: threading.Thread | None = None
        self.session: TeleopSession | None = None
        self.operator: LiveOperator | None = None

        # telemetry written by the loop thread, read by the event loop
        self._latest: StepSnapshot | None = None
        self._deltas: list[tuple[int, tuple[float, float]]] = []
        self._history: list[list[tuple[float, float]]] = []
        self._events: deque[SessionEvent] = deque()
        self._dirty = False
        self._axis = board_axis(config.env)
        self._force_sum = 0.0
        self._force_count = 0
        self._force_extremum = 0.0

        self._clients: dict[int, _Client] = {}
        self._controller_uid: int | None = None
        self._next_uid = 0

    # -- lifecycle (event loop side) --------------------------------------

    @property
    def running(self) -> bool:
        return (self._thread is not None and self._thread.is_alive()
                and not self._pause.is_set())

    @property
    def active(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    def _start_session(self) -> None:
        self.operator = LiveOperator()
        self.session = TeleopSession(self.config, self.operator,
                                     on_step=self._on_step)
        with self._lock:
            self._latest = None
            self._deltas.clear()
            self._history.clear()
            self._dirty = False
            self._force_sum = 0.0
            self._force_count = 0
            self._force_extremum = 0.0
        self._stop.clear()
        self._pause.clear()
        self._thread = threading.Thread(target=self._run_loop,
                                        name="teleop-loop", daemon=True)
        self._thread.start()

    def _stop_session(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None

    def shutdown(self) -> None:
        self._stop_session()

    # -- control loop (thread side) ----------------------------------------

    def _run_loop(self) -> None:
        session, op = self.session, self.operator
        period = self.config.control.dt if self.real_time else 0.0
        deadline = time.perf_counter()
        while not self._stop.is_set():
            if self._pause.is_set() or op.received == 0:
                time.sleep(0.005)
                deadline = time.perf_counter()
                continue
            session.step_once()
            if session.failed:
                with self._lock:
                    self._events.append(SessionEvent(
                        "failed", session.failure_reason))
                break
            if period:
                deadline += period
                behind = time.perf_counter() - deadline
                if behind > 0.25:
                    deadline = time.perf_counter()
                else:
                    self._sleep_until(deadline)

    @staticmethod
    def _sleep_until(deadline: float) -> None:
        # Coarse sleep, then spin the last slice for sub-ms cadence.
        while True:
            remaining = deadline - time.perf_counter()
            if remaining <= 0.0:
                return
            if remaining > 0.0008:
                time.sleep(remaining - 0.0005)

    def _on_step(self, snap: StepSnapshot) -> None:
        with self._lock:
            self._latest = snap
            for seg, uv in snap.stroke_delta:
                while len(self._history) <= seg:
                    self._history.append([])
                self._history[seg].append(uv)
            self._deltas.extend(snap.stroke_delta)
            mag = float(np.linalg.norm(snap.f_e))
            if mag >= self.config.contact.force_epsilon:
                along = float(snap.f_e[self._axis])
                self._force_sum += along
                self._force_count += 1
                if abs(along) > abs(self._force_extremum):
                    self._force_extremum = along
            self._dirty = True

    # -- telemetry assembly -------------------------------------------------

    def _snapshot_message(self) -> StateSnapshot | None:
        with self._lock:
            if not self._dirty or self._latest is None:
                return None
            snap = self._latest
            deltas = tuple((seg, (uv[0], uv[1])) for seg, uv in self._deltas)
            self._deltas.clear()
            self._dirty = False
        return self._wire_snapshot(snap, deltas)

    @staticmethod
    def _wire_snapshot(snap: StepSnapshot, deltas) -> StateSnapshot:
        return StateSnapshot(
            t=snap.t,
            position=tuple(float(x) for x in snap.plant_p),
            orientation=tuple(float(x) for x in snap.plant_q),
            f_e=tuple(float(x) for x in snap.f_e),
            f_h=tuple(float(x) for x in snap.f_h),
            contact_state=snap.contact_state,
            saturation=tuple(bool(b) for b in snap.sat_flags),
            chalk_intact=snap.chalk_intact,
            stroke_delta=deltas)

    def _history_snapshot(self) -> StateSnapshot | None:
        """Full stroke history for late joiners, with the latest state."""
        with self._lock:
            if self._latest is None:
                return None
            deltas = tuple((seg, (uv[0], uv[1]))
                           for seg, pts in enumerate(self._history)
                           for uv in pts)
            return self._wire_snapshot(self._latest, deltas)

    def _metrics_message(self) -> MetricsUpdate | None:
        with self._lock:
            if self._force_count == 0:
                return None
            mean = self._force_sum / self._force_count
            extremum = self._force_extremum
        return MetricsUpdate(
            robot_mean=mean,
            robot_extremum=extremum,
            mean_difference=abs(HUMAN_MEAN_N - mean),
            peak_difference=abs(abs(HUMAN_EXTREMUM_N) - abs(extremum)),
            human_mean=HUMAN_MEAN_N,
            human_extremum=HUMAN_EXTREMUM_N)

    def _drain_events(self) -> list[SessionEvent]:
        with self._lock:
            out = list(self._events)
            self._events.clear()
        return out

    def scenario_message(self) -> ScenarioState:
        return ScenarioState(label=self.config.label,
                             render_mode=self.config.render_mode,
                             saturation_enabled=self.config.saturation_enabled,
                             force_threshold=self.config.normal_force_limit,
                             running=self.running)

    def strokes_svg(self) -> str:
        with self._lock:
            segments = [np.array(pts, dtype=float).reshape(-1, 2)
                        for pts in self._history]
        return strokes_to_svg(segments)

    # -- client registry ------------------------------------------------

    async def register(self, ws: WebSocket) -> _Client:
        client = _Client(uid=self._next_uid, ws=ws)
        self._next_uid += 1
        self._clients[client.uid] = client
        client.sender = asyncio.create_task(self._send_worker(client))
        self._enqueue(client, RoleAssign(role=client.role))
        self._enqueue(client, self.scenario_message())
        replay = self._history_snapshot()
        if replay is not None:
            self._enqueue(client, replay)
        return client

    def unregister(self, client: _Client) -> None:
        self._clients.pop(client.uid, None)
        if client.sender is not None:
            client.sender.cancel()
        if client.uid == self._controller_uid:
            self._controller_uid = None
            if self.active:
                self._pause.set()
                self.broadcast(SessionEvent("paused", "controller left"))

    async def _send_worker(self, client: _Client) -> None:
        try:
            while True:
                text = await client.outbox.get()
                await client.ws.send_text(text)
        except (WebSocketDisconnect, RuntimeError, asyncio.CancelledError):
            pass

    def _enqueue(self, client: _Client, msg: WireMessage) -> None:
        text = encode_message(msg)
        try:
            client.outbox.put_nowait(text)
        except asyncio.QueueFull:
            # Slow client: sacrifice its oldest frame, never the loop.
            with contextlib.suppress(asyncio.QueueEmpty):
                client.outbox.get_nowait()
            with contextlib.suppress(asyncio.QueueFull):
                client.outbox.put_nowait(text)

    def broadcast(self, msg: WireMessage) -> None:
        text = encode_message(msg)
        for client in list(self._clients.values()):
            try:
                client.outbox.put_nowait(text)
            except asyncio.QueueFull:
                with contextlib.suppress(asyncio.QueueEmpty):
                    client.outbox.get_nowait()
                with contextlib.suppress(asyncio.QueueFull):
                    client.outbox.put_nowait(text)

    # -- message dispatch -------------------------------------------------

    def handle(self, client: _Client, msg: WireMessage) -> None:
        if isinstance(msg, StylusInput):
            self._handle_stylus(client, msg)
        elif isinstance(msg, SessionCtl):
            self._handle_ctl(client, msg)
        elif isinstance(msg, ScenarioSet):
            self._handle_scenario(client, msg)
        else:
            self._enqueue(client, ErrorMessage(
                "bad_message", f"unexpected {msg.TYPE} from client"))

    def _handle_stylus(self, client: _Client, msg: StylusInput) -> None:
        if client.uid != self._controller_uid:
            self._enqueue(client, ErrorMessage(
                "not_controller", "only the controller may send input"))
            return
        if self.operator is None:
            self._enqueue(client, ErrorMessage(
                "session_active", "no session running"))
            return
        try:
            self.operator.push(np.array(msg.position),
                               np.array(msg.orientation))
        except ValueError as exc:
            self._enqueue(client, ErrorMessage("bad_message", str(exc)))

    def _handle_ctl(self, client: _Client, msg: SessionCtl) -> None:
        if msg.action == "start":
            self._ctl_start(client)
        elif msg.action == "stop":
            self._ctl_stop(client)
        else:
            self._ctl_reset(client)

    def _ctl_start(self, client: _Client) -> None:
        if self._controller_uid is None:
            self._controller_uid = client.uid
            client.role = "controller"
            self._enqueue(client, RoleAssign(role="controller"))
        elif self._controller_uid != client.uid:
            self._enqueue(client, ErrorMessage(
                "controller_exists", "another client controls the session"))
            return
        if not self.active:
            self._start_session()
            self.broadcast(SessionEvent("started"))
        elif self._pause.is_set():
            self._pause.clear()
            self.broadcast(SessionEvent("started", "resumed"))
        else:
            self._enqueue(client, ErrorMessage(
                "session_active", "session already running"))

    def _ctl_stop(self, client: _Client) -> None:
        if client.uid != self._controller_uid:
            self._enqueue(client, ErrorMessage(
                "not_controller", "only the controller may stop"))
            return
        if self.active:
            self._stop_session()
            self.broadcast(SessionEvent("completed"))

    def _ctl_reset(self, client: _Client) -> None:
        if self._controller_uid is not None \
                and client.uid != self._controller_uid:
            self._enqueue(client, ErrorMessage(
                "not_controller", "only the controller may reset"))
            return
        self._stop_session()
        self.session = None
        self.operator = None
        with self._lock:
            self._latest = None
            self._deltas.clear()
            self._history.clear()
            self._events.clear()
            self._dirty = False
            self._force_sum = 0.0
            self._force_count = 0
            self._force_extremum = 0.0
        self.broadcast(SessionEvent("reset"))

    def _handle_scenario(self, client: _Client, msg: ScenarioSet) -> None:
        if self.active:
            self._enqueue(client, ErrorMessage(
                "session_active", "stop the session before switching"))
            return
        try:
            if msg.label is not None:
                new_config = scenario(msg.label)
            else:
                new_config = config_from_dict(msg.config)
        except (ConfigError, ValueError) as exc:
            self._enqueue(client, ErrorMessage("bad_scenario", str(exc)))
            return
        self.config = new_config
        self._axis = board_axis(new_config.env)
        self.session = None
        self.operator = None
        self.broadcast(self.scenario_message())

    # -- periodic broadcast -------------------------------------------------

    async def telemetry_loop(self) -> None:
        period = 1.0 / SNAPSHOT_HZ
        last_metrics = time.monotonic()
        while True:
            await asyncio.sleep(period)
            for event in self._drain_events():
                self.broadcast(event)
            snap = self._snapshot_message()
            if snap is not None:
                self.broadcast(snap)
            now = time.monotonic()
            if now - last_metrics >= METRICS_PERIOD_S:
                metrics = self._metrics_message()
                if metrics is not None:
                    self.broadcast(metrics)
                last_metrics = now


def build_app(config: ScenarioConfig | None = None, real_time: bool = True,
              static_dir: str | None = None) -> FastAPI:
    service = SessionService(config if config is not None else scenario("C"),
                             real_time=real_time)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(service.telemetry_loop())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task
            service.shutdown()

    app = FastAPI(lifespan=lifespan)
    app.state.service = service

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "version": SERVICE_VERSION,
                "wire_version": WIRE_VERSION,
                "scenario": service.config.label,
                "running": service.running}

    @app.get("/strokes.svg")
    def strokes() -> Response:
        return Response(content=service.strokes_svg(),
                        media_type="image/svg+xml")

    @app.websocket("/session")
    async def session_ws(ws: WebSocket) -> None:
        await ws.accept()
        client = await service.register(ws)
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = decode_message(text)
                except WireError as exc:
                    service._enqueue(client, ErrorMessage(
                        "bad_message", str(exc)))
                    continue
                service.handle(client, msg)
        except WebSocketDisconnect:
            pass
        finally:
            service.unregister(client)

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="cockpit")

    return app
