"""Live-operation WebSocket service.

One asyncio simulation loop ticks the trial at 100 Hz and publishes state
frames at 60 Hz.  Clients talk JSON over `/ws`; inbound pose inputs are
latest-wins, outbound frames are dropped for slow clients so the tick
never waits on the network.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .arbitration import FACTOR_NAMES, FactorSet, alpha_from_factors, apply_factor_edit
from .course import load_course
from .geometry import Pose
from .session import Mode, SimParams, TrialTicker

PROTOCOL_VERSION = 1

QUAT_INGEST_TOL = 1e-3

PHASE_BETWEEN = "between_trials"
PHASE_READY = "ready"
PHASE_RUNNING = "running"


@dataclass
class LiveSession:
    """Single-operator session state: phase machine, factors, live trial."""

    course_id: str = "training"
    mode: Mode = Mode.SC_USER
    sim: SimParams = field(default_factory=SimParams)
    factors: FactorSet = field(default_factory=FactorSet)
    seed: int = 0

    def __post_init__(self):
        self.course = load_course(self.course_id)
        self.phase = PHASE_BETWEEN
        self.ticker: TrialTicker | None = None
        self.latest_input: Pose | None = None
        self.buzz = False
        self.fatal = False
        self.trial_logs = []
        self._trial_count = 0

    # --- state machine -----------------------------------------------------

    def start_trial(self) -> dict:
        if self.phase == PHASE_RUNNING:
            return {"type": "rejected", "reason": "trial_running"}
        self.ticker = TrialTicker(self.mode, self.course,
                                  self.factors.as_dict(),
                                  self.seed + self._trial_count, self.sim)
        self.latest_input = None
        self.buzz = False
        self.fatal = False
        self.phase = PHASE_RUNNING
        self._trial_count += 1
        return {"type": "ack", "what": "start_trial"}

    def end_review(self) -> dict:
        if self.phase != PHASE_BETWEEN:
            return {"type": "rejected", "reason": "not_in_review"}
        self.phase = PHASE_READY
        return {"type": "ack", "what": "end_review"}

    def edit_factor(self, factor: str, direction: str) -> dict:
        if self.phase == PHASE_RUNNING:
            return {"type": "rejected", "reason": "trial_running"}
        if self.phase != PHASE_BETWEEN:
            return {"type": "rejected", "reason": "review_confirmed"}
        try:
            self.factors = apply_factor_edit(self.factors, factor, direction)
        except ValueError as exc:
            return {"type": "error", "reason": str(exc)}
        return {"type": "ack", "what": "edit_factor",
                "factors": self.factors.to_ui_scale()}

    def ingest_input(self, pose_list) -> dict | None:
        v = np.asarray(pose_list, dtype=float)
        if v.shape != (7,) or not np.all(np.isfinite(v)):
            return {"type": "error", "reason": "bad_pose"}
        q = v[3:]
        norm = float(np.linalg.norm(q))
        if abs(norm - 1.0) > QUAT_INGEST_TOL:
            return {"type": "error", "reason": "bad_quaternion"}
        self.latest_input = Pose(v[:3], q / norm)
        return None

    # --- simulation --------------------------------------------------------

    def tick(self) -> None:
        if self.phase != PHASE_RUNNING or self.ticker is None:
            return
        handle_input = self.latest_input or self.ticker.robot
        record = self.ticker.tick(handle_input)
        self.buzz = record.contact.in_contact
        self.fatal = record.contact.fatal
        if self.ticker.done:
            self.trial_logs.append(self.ticker.log)
            self.phase = PHASE_BETWEEN

    def snapshot(self, seq: int) -> dict:
        if self.ticker is not None:
            robot = self.ticker.robot
            t = self.ticker.t
            last = self.ticker.log.records[-1] if self.ticker.log.records else None
            progress = last.progress if last else 0.0
            handle = (last.handle_input if last else robot)
        else:
            from .session import start_pose
            robot = start_pose(self.course)
            handle = robot
            t = 0.0
            progress = 0.0
        alpha = alpha_from_factors(self.factors).alpha
        return {
            "type": "state",
            "seq": seq,
            "t": t,
            "protocol_version": PROTOCOL_VERSION,
            "robot_pose": _pose_list(robot),
            "handle_pose": _pose_list(handle),
            "progress": progress,
            "buzz": self.buzz,
            "fatal": self.fatal,
            "trial_phase": self.phase,
            "factors": self.factors.to_ui_scale(),
            "alpha": [float(a) for a in alpha],
        }

    def hello(self) -> dict:
        return {
            "type": "hello",
            "protocol_version": PROTOCOL_VERSION,
            "mode": self.mode.value,
            "course": {
                "name": self.course.name,
                "points": [[float(c) for c in p] for p in self.course.centerline],
                "wire_radius": self.course.wire_radius,
                "start_s": self.course.start_s,
                "end_s": self.course.end_s,
            },
            "ring_radius": self.sim.ring_radius,
            "tube_radius": self.sim.tube_radius,
            "factors": self.factors.to_ui_scale(),
            "trial_phase": self.phase,
        }


def _pose_list(p: Pose) -> list[float]:
    return [float(x) for x in np.concatenate([p.position, p.orientation])]


def handle_message(msg: dict, session: LiveSession) -> dict | None:
    """Apply one parsed client message; returns the reply frame, if any."""
    mtype = msg.get("type")
    if mtype == "hello":
        return session.hello()
    if mtype == "input":
        return session.ingest_input(msg.get("pose", []))
    if mtype == "edit_factor":
        return session.edit_factor(msg.get("factor", ""), msg.get("direction", ""))
    if mtype == "start_trial":
        return session.start_trial()
    if mtype == "end_review":
        return session.end_review()
    return {"type": "error", "reason": "unknown_type"}


def build_app(course_id: str = "training", mode: Mode = Mode.SC_USER,
              sim: SimParams | None = None,
              factors: FactorSet | None = None,
              realtime: bool = True) -> FastAPI:
    """FastAPI app exposing /ws (protocol v1) and /healthz.

    With realtime=False the simulation only advances via the test-only
    /advance endpoint, which keeps protocol tests deterministic.
    """
    session = LiveSession(course_id=course_id, mode=mode,
                          sim=sim or SimParams(),
                          factors=factors or FactorSet())
    app = FastAPI()
    app.state.session = session
    clients: list[asyncio.Queue] = []

    async def sim_loop():
        frame_every = max(1, int(round(1.0 / 60.0 / session.sim.dt)))
        seq = 0
        i = 0
        loop = asyncio.get_running_loop()
        next_t = loop.time()
        while True:
            session.tick()
            if i % frame_every == 0:
                seq += 1
                frame = session.snapshot(seq)
                for q in clients:
                    if q.full():
                        try:
                            q.get_nowait()  # latest-wins: drop stale frame
                        except asyncio.QueueEmpty:
                            pass
                    q.put_nowait(frame)
            i += 1
            next_t += session.sim.dt
            await asyncio.sleep(max(0.0, next_t - loop.time()))

    @app.on_event("startup")
    async def _start():
        if realtime:
            app.state.sim_task = asyncio.create_task(sim_loop())

    @app.on_event("shutdown")
    async def _stop():
        task = getattr(app.state, "sim_task", None)
        if task:
            task.cancel()

    @app.get("/healthz")
    async def healthz():
        return {"ok": True, "trial_phase": session.phase}

    if not realtime:
        @app.post("/advance")
        async def advance(ticks: int = 1):
            for _ in range(ticks):
                session.tick()
            return session.snapshot(seq=0)

    @app.websocket("/ws")
    async def ws(websocket: WebSocket):
        await websocket.accept()
        queue: asyncio.Queue = asyncio.Queue(maxsize=1)
        clients.append(queue)

        async def sender():
            n = 0
            while True:
                frame = await queue.get()
                n += 1
                frame = dict(frame, seq=n)
                await websocket.send_text(json.dumps(frame))

        send_task = asyncio.create_task(sender()) if realtime else None
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise ValueError
                except ValueError:
                    await websocket.send_text(
                        json.dumps({"type": "error", "reason": "parse"}))
                    continue
                reply = handle_message(msg, session)
                if reply is not None:
                    await websocket.send_text(json.dumps(reply))
                elif not realtime:
                    # manual mode has no broadcast task; echo a state frame
                    await websocket.send_text(json.dumps(session.snapshot(0)))
        except WebSocketDisconnect:
            pass
        finally:
            if send_task:
                send_task.cancel()
            clients.remove(queue)
            if session.phase == PHASE_RUNNING and not clients:
                if session.ticker is not None:
                    session.ticker.abort()
                    session.trial_logs.append(session.ticker.log)
                session.phase = PHASE_BETWEEN

    return app
