"""Experiment state machine: trials, sessions, modes, metrics, JSONL logs.

A trial runs the 100 Hz closed loop with frozen arbitration; between trials
the session either adapts theta (SC), applies user/scripted factor edits
(SC_USER), or does nothing (TELEOP).
"""

from __future__ import annotations

import gc
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np
import yaml

from . import adaptation
from .admittance import AdmittanceParams, IntegratorState, control_tick
from .apf import FieldParams, net_wrench
from .arbitration import (FACTOR_NAMES, ArbitrationMatrix, FactorSet, Theta,
                          alpha_from_theta, apply_factor_edit)
from .course import (ContactReport, LoopHandle, WireCourse, buzz_events,
                     check_contact, load_course, progress, sample_environment)
from .geometry import Pose, Twist, Wrench, quat_from_two_vectors

LOG_SCHEMA_VERSION = 1


class Mode(Enum):
    TELEOP = "teleop"
    SC = "sc"
    SC_USER = "sc_user"


class Outcome(Enum):
    SUCCESS = "success"
    FATAL = "fatal"
    TIMEOUT = "timeout"
    ABORTED = "aborted"


class InputSourceDisconnected(RuntimeError):
    """Raised by a live input source when the operator drops."""


class ConfigError(ValueError):
    """Invalid experiment configuration; message lists the offending fields."""


class MetricError(ValueError):
    """Log too short for the requested metric."""


@dataclass(frozen=True)
class SimParams:
    """Everything a trial needs besides mode, course, and factors."""

    dt: float = 0.01
    time_limit: float = 120.0
    field_params: FieldParams = field(default_factory=FieldParams)
    admittance: AdmittanceParams = field(
        default_factory=lambda: AdmittanceParams(leak=3.0))
    ring_radius: float = 0.035
    tube_radius: float = 0.004
    k_wire: float = 1000.0
    fatal_force: float = 8.0
    debounce: float = 0.1
    sample_spacing: float = 0.005
    sample_range: float = 0.08

    def __post_init__(self):
        if self.dt <= 0.0 or self.time_limit <= 0.0:
            raise ConfigError("dt and time_limit must be positive")


@dataclass(frozen=True)
class TickRecord:
    t: float
    handle_input: Pose
    robot: Pose
    u_h: Twist
    u_r: Twist
    u_sc: Twist
    w_a: Wrench
    contact: ContactReport
    progress: float


@dataclass
class TrialLog:
    mode: Mode
    course_name: str
    seed: int
    dt: float
    factors: dict[str, float]           # snapshot, immutable for the trial
    sim: SimParams
    records: list[TickRecord] = field(default_factory=list)
    outcome: Outcome | None = None

    @property
    def duration(self) -> float:
        return self.records[-1].t if self.records else 0.0


@dataclass(frozen=True)
class Metrics:
    outcome: Outcome
    collisions: int
    mean_squared_jerk: float
    time_to_success: float | None = None


def _arbitration_for(mode: Mode, factors: dict[str, float]) -> ArbitrationMatrix:
    if mode is Mode.TELEOP:
        return ArbitrationMatrix.identity()
    theta = Theta(np.array([
        factors["speed"], 1.0 - factors["depth_assist"], factors["turnability"]]))
    return alpha_from_theta(theta)


def start_pose(course: WireCourse) -> Pose:
    """Ring centered on the wire at start_s, plane normal to the tangent."""
    tangent = course.tangent_at(course.start_s)
    orientation = quat_from_two_vectors(np.array([0.0, 0.0, 1.0]), tangent)
    return Pose(course.point_at(course.start_s), orientation)


class TrialTicker:
    """Stepwise form of one trial; the headless harness and the live
    gateway both drive this, so logged inputs replay bit-for-bit."""

    def __init__(self, mode: Mode, course: WireCourse,
                 factors: dict[str, float], seed: int, sim: SimParams):
        missing = [n for n in FACTOR_NAMES if n not in factors]
        if missing:
            raise ConfigError(f"factor snapshot missing {missing}")
        factors = {n: float(factors[n]) for n in FACTOR_NAMES}
        self.course = course
        self.sim = sim
        self.a_matrix = _arbitration_for(mode, factors)
        self.field_params = sim.field_params.scaled(factors["safety"])
        self.params = replace(
            sim.admittance,
            stiffness=factors["responsiveness"] * sim.admittance.stiffness)
        self.robot = start_pose(course)
        self.state = IntegratorState()
        self.log = TrialLog(mode=mode, course_name=course.name, seed=seed,
                            dt=sim.dt, factors=factors, sim=sim)
        self._n_max = int(round(sim.time_limit / sim.dt))
        self._i = 0

    @property
    def t(self) -> float:
        return self._i * self.sim.dt

    @property
    def done(self) -> bool:
        return self.log.outcome is not None

    def tick(self, handle_input: Pose) -> TickRecord:
        if self.done:
            raise RuntimeError("trial already finished")
        sim = self.sim
        handle = LoopHandle(self.robot, sim.ring_radius, sim.tube_radius)
        nbhd = sample_environment(self.course, handle, sim.sample_spacing,
                                  sim.sample_range)
        w_a = net_wrench(handle.control_points(), nbhd, handle.com_world(),
                         self.field_params)
        u_sc, u_h, u_r, robot_next = control_tick(
            handle_input, self.robot, w_a, self.a_matrix, self.params,
            self.state, sim.dt)
        next_handle = LoopHandle(robot_next, sim.ring_radius, sim.tube_radius)
        contact = check_contact(self.course, next_handle, sim.k_wire,
                                sim.fatal_force)
        frac = progress(self.course, next_handle)
        record = TickRecord(
            t=self.t, handle_input=handle_input, robot=robot_next, u_h=u_h,
            u_r=u_r, u_sc=u_sc, w_a=w_a, contact=contact, progress=frac)
        self.log.records.append(record)
        self.robot = robot_next
        self._i += 1

        if contact.fatal:
            self.log.outcome = Outcome.FATAL
        elif frac >= 1.0:
            self.log.outcome = Outcome.SUCCESS
        elif self._i > self._n_max:
            self.log.outcome = Outcome.TIMEOUT
        return record

    def abort(self) -> None:
        self.log.outcome = Outcome.ABORTED


def run_trial(mode: Mode, course: WireCourse, factors: dict[str, float],
              input_source, seed: int, sim: SimParams) -> TrialLog:
    """One closed-loop game trial with frozen arbitration settings."""
    ticker = TrialTicker(mode, course, factors, seed, sim)
    # the tick loop allocates thousands of acyclic record objects; cyclic GC
    # passes over that growing heap cause multi-hundred-ms stalls, so pause
    # collection for the loop (refcounting still reclaims all temporaries)
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        while not ticker.done:
            try:
                handle_input = input_source.step(ticker.robot, course,
                                                 ticker.t, sim.dt)
            except InputSourceDisconnected:
                ticker.abort()
                break
            ticker.tick(handle_input)
    finally:
        if gc_was_enabled:
            gc.enable()
    return ticker.log


class _ReplaySource:
    """Feeds the handle inputs recorded in a log back into the controller."""

    def __init__(self, records):
        self._poses = [r.handle_input for r in records]
        self._i = 0

    def step(self, robot, course, t, dt) -> Pose:
        pose = self._poses[min(self._i, len(self._poses) - 1)]
        self._i += 1
        return pose


def replay_trial(log: TrialLog, course: WireCourse) -> TrialLog:
    """Re-run the controller over the logged handle inputs (determinism check)."""
    # n_max = len(records) - 1 makes a timed-out trial hit its timeout on
    # exactly the same tick; success/fatal outcomes end earlier anyway
    sim = replace(log.sim, time_limit=max(1, len(log.records) - 1) * log.dt)
    return run_trial(log.mode, course, log.factors, _ReplaySource(log.records),
                     log.seed, sim)


def mean_squared_jerk(positions: np.ndarray, dt: float) -> float:
    """Mean squared third derivative of a position trace.

    Central five-point stencil; the two ticks at each end are excluded.
    """
    p = np.asarray(positions, dtype=float)
    if p.shape[0] < 7:
        raise MetricError("need at least 7 ticks for the third-derivative stencil")
    jerk = (p[4:] - 2.0 * p[3:-1] + 2.0 * p[1:-3] - p[:-4]) / (2.0 * dt ** 3)
    return float(np.mean(np.sum(jerk ** 2, axis=1)))


def compute_metrics(log: TrialLog) -> Metrics:
    if len(log.records) < 7:
        raise MetricError("trial log too short for metrics")
    positions = np.array([r.handle_input.position for r in log.records])
    msj = mean_squared_jerk(positions, log.dt)
    collisions = buzz_events((r.contact for r in log.records),
                             log.sim.debounce, log.dt)
    tts = log.duration if log.outcome is Outcome.SUCCESS else None
    return Metrics(outcome=log.outcome, collisions=collisions,
                   mean_squared_jerk=msj, time_to_success=tts)


# --- serialization ---------------------------------------------------------

def _pose_to_list(p: Pose) -> list[float]:
    return [float(x) for x in np.concatenate([p.position, p.orientation])]


def _pose_from_list(v) -> Pose:
    return Pose(np.array(v[:3], dtype=float), np.array(v[3:], dtype=float))


def tick_to_dict(r: TickRecord) -> dict:
    return {
        "t": r.t,
        "handle": _pose_to_list(r.handle_input),
        "robot": _pose_to_list(r.robot),
        "u_h": [float(x) for x in r.u_h.as_vector()],
        "u_r": [float(x) for x in r.u_r.as_vector()],
        "u_sc": [float(x) for x in r.u_sc.as_vector()],
        "w_a": [float(x) for x in r.w_a.as_vector()],
        "contact": {
            "in_contact": r.contact.in_contact,
            "penetration": r.contact.penetration,
            "proxy_force": r.contact.proxy_force,
            "fatal": r.contact.fatal,
        },
        "progress": r.progress,
    }


def tick_from_dict(d: dict) -> TickRecord:
    c = d["contact"]
    return TickRecord(
        t=d["t"],
        handle_input=_pose_from_list(d["handle"]),
        robot=_pose_from_list(d["robot"]),
        u_h=Twist.from_vector(d["u_h"]),
        u_r=Twist.from_vector(d["u_r"]),
        u_sc=Twist.from_vector(d["u_sc"]),
        w_a=Wrench.from_vector(d["w_a"]),
        contact=ContactReport(c["in_contact"], c["penetration"],
                              c["proxy_force"], c["fatal"]),
        progress=d["progress"],
    )


def log_header(log: TrialLog) -> dict:
    return {
        "schema_version": LOG_SCHEMA_VERSION,
        "mode": log.mode.value,
        "course": log.course_name,
        "seed": log.seed,
        "dt": log.dt,
        "factors": {k: float(v) for k, v in log.factors.items()},
        "outcome": log.outcome.value if log.outcome else None,
    }


def write_jsonl(log: TrialLog, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"header": log_header(log)}, sort_keys=True) + "\n")
        for rec in log.records:
            fh.write(json.dumps(tick_to_dict(rec), sort_keys=True) + "\n")


def read_jsonl(path: Path, sim: SimParams | None = None) -> TrialLog:
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    header = lines[0]["header"]
    log = TrialLog(
        mode=Mode(header["mode"]), course_name=header["course"],
        seed=header["seed"], dt=header["dt"], factors=header["factors"],
        sim=sim or SimParams(dt=header["dt"]),
        records=[tick_from_dict(d) for d in lines[1:]],
        outcome=Outcome(header["outcome"]) if header["outcome"] else None)
    return log


# --- experiment ------------------------------------------------------------

@dataclass
class ExperimentConfig:
    mode: Mode
    courses: list[str]                  # one course id/descriptor per session
    trials_per_session: int = 5
    base_seed: int = 0
    policy: str = "typical"
    factors: dict[str, float] = field(
        default_factory=lambda: FactorSet().as_dict())
    sim: SimParams = field(default_factory=SimParams)
    chi_nom: float = 0.1
    r_desired: list[float] | None = None  # SC mode; derived from expert if None
    edits: list[list[list[str]]] = field(default_factory=list)
    # SC_USER: edits[i] applies after trial i (global index), each a
    # list of [factor, direction] pairs

    @staticmethod
    def from_mapping(doc: dict) -> "ExperimentConfig":
        problems = []
        if "mode" not in doc:
            problems.append("mode")
        if "courses" not in doc or not doc["courses"]:
            problems.append("courses")
        if problems:
            raise ConfigError(f"missing config fields: {problems}")
        try:
            mode = Mode(doc["mode"])
        except ValueError:
            raise ConfigError(f"mode: unknown value {doc['mode']!r}") from None
        sim_doc = doc.get("sim", {})
        sim = SimParams(
            dt=sim_doc.get("dt", 0.01),
            time_limit=sim_doc.get("time_limit", 120.0),
            field_params=FieldParams(**sim_doc.get("field", {})),
            admittance=AdmittanceParams(**{
                k: np.asarray(v, dtype=float) if isinstance(v, list) else v
                for k, v in sim_doc.get("admittance", {}).items()}),
            ring_radius=sim_doc.get("ring_radius", 0.035),
            tube_radius=sim_doc.get("tube_radius", 0.004),
            k_wire=sim_doc.get("k_wire", 1000.0),
            fatal_force=sim_doc.get("fatal_force", 8.0),
            debounce=sim_doc.get("debounce", 0.1),
            sample_spacing=sim_doc.get("sample_spacing", 0.005),
            sample_range=sim_doc.get("sample_range", 0.08),
        )
        factors = FactorSet(**doc.get("factors", {})).as_dict()
        return ExperimentConfig(
            mode=mode, courses=list(doc["courses"]),
            trials_per_session=int(doc.get("trials_per_session", 5)),
            base_seed=int(doc.get("seed", 0)),
            policy=doc.get("policy", "typical"),
            factors=factors, sim=sim,
            chi_nom=float(doc.get("chi_nom", 0.1)),
            r_desired=doc.get("r_desired"),
            edits=doc.get("edits", []),
        )

    @staticmethod
    def from_yaml(text: str) -> "ExperimentConfig":
        doc = yaml.safe_load(text)
        if not isinstance(doc, dict):
            raise ConfigError("config: expected a mapping document")
        return ExperimentConfig.from_mapping(doc)


def derive_expert_reference(course: WireCourse, sim: SimParams,
                            seed: int = 0) -> np.ndarray:
    """r_d from a scripted expert run with high assistance, per SC setup."""
    from .operator import PRESETS, ScriptedOperator
    expert_factors = dict(FactorSet(
        speed=0.5, depth_assist=0.9, turnability=0.5,
        safety=1.0, responsiveness=0.5).as_dict())
    source = ScriptedOperator(PRESETS["expert"], seed_offset=seed)
    log = run_trial(Mode.SC, course, expert_factors, source, seed, sim)
    return adaptation.expert_reference(log)


def run_experiment(config: ExperimentConfig, out_dir: Path) -> list[dict]:
    """Execute all sessions; write per-trial JSONL logs and a summary."""
    from .operator import PRESETS, ScriptedOperator
    if config.policy not in PRESETS:
        raise ConfigError(f"policy: unknown preset {config.policy!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    factors = dict(config.factors)
    adapt_state = None
    if config.mode is Mode.SC:
        if config.r_desired is not None:
            r_d = np.asarray(config.r_desired, dtype=float)
        else:
            r_d = derive_expert_reference(
                load_course(config.courses[0]), config.sim, config.base_seed)
        theta = Theta(np.array([factors["speed"], 1.0 - factors["depth_assist"],
                                factors["turnability"]]))
        adapt_state = adaptation.AdaptState(
            theta=theta, r_desired=r_d, chi_nom=config.chi_nom)

    summary: list[dict] = []
    global_trial = 0
    for si, course_id in enumerate(config.courses):
        course = load_course(course_id)
        for ti in range(config.trials_per_session):
            seed = config.base_seed + 1000 * si + ti
            source = ScriptedOperator(PRESETS[config.policy], seed_offset=seed)
            log = run_trial(config.mode, course, factors, source, seed,
                            config.sim)
            path = out_dir / f"session{si:02d}_trial{ti:02d}.jsonl"
            write_jsonl(log, path)
            metrics = compute_metrics(log)
            summary.append({
                "session": si, "trial": ti, "course": course.name,
                "mode": config.mode.value, "seed": seed,
                "factors": {k: float(v) for k, v in factors.items()},
                "outcome": metrics.outcome.value,
                "collisions": metrics.collisions,
                "mean_squared_jerk": metrics.mean_squared_jerk,
                "time_to_success": metrics.time_to_success,
            })

            # between-trial phase
            if config.mode is Mode.SC and adapt_state is not None:
                wrenches = np.array([r.w_a.as_vector() for r in log.records])
                r_now = adaptation.trial_error(Wrench.from_vector(
                    wrenches.mean(axis=0)))
                adapt_state = adaptation.update_theta(adapt_state, r_now)
                factors = dict(factors)
                factors["speed"] = float(adapt_state.theta.values[0])
                factors["depth_assist"] = float(1.0 - adapt_state.theta.values[1])
                factors["turnability"] = float(adapt_state.theta.values[2])
            elif config.mode is Mode.SC_USER and global_trial < len(config.edits):
                fs = FactorSet(**factors)
                for which, direction in config.edits[global_trial]:
                    fs = apply_factor_edit(fs, which, direction)
                factors = fs.as_dict()
            global_trial += 1

    with open(out_dir / "summary.jsonl", "w", encoding="utf-8") as fh:
        for row in summary:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    return summary
