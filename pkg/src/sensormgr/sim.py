"""Discrete-time world: truth, measurements, filtering, scoring, and the
fusion-center decisions, stepped in a fixed order.

Random draws come from numpy's PCG64 generator. The scenario seed feeds a
``SeedSequence`` that is split into independent streams for scenario
construction, filter initialization, process noise and measurement noise.
A fixed-size block is drawn from the noise streams every step, so the
guidance mode never changes which numbers a given step receives.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .config import initial_targets, validate
from .dynamics import SensorState, TargetState, build_transition, propagate_target, step_sensor
from .errors import (
    DegenerateGeometry,
    EmptyRegion,
    NoFeasibleCandidate,
    RankDeficient,
    SensorMgrError,
    SimulationError,
)
from .estimation import Estimate, MeasurementRecord, sequential_update, time_update
from .information import (
    AssignedTarget,
    PerfObjective,
    fim_recursion_batch,
    info_score,
    measurement_fim_for_target,
)
from .manager import (
    Assignment,
    detect_deployment_need,
    enumerate_candidate_groups,
    guide_conditional_gradient,
    guide_optimal,
    plan_deployment,
)
from .optimize import region_vertices
from .sensing import Measurement, coverage_region, in_coverage, measure


@dataclass
class StepRecord:
    step: int
    time: float
    info_scores: np.ndarray
    truth: np.ndarray
    estimates: np.ndarray
    sensor_positions: dict = field(default_factory=dict)
    commands: dict = field(default_factory=dict)
    perf_scores: dict = field(default_factory=dict)
    guidance_micros: dict = field(default_factory=dict)
    events: list = field(default_factory=list)
    misses: int = 0


@dataclass
class TraceLog:
    scenario: str
    mode: str
    weights: tuple
    records: list = field(default_factory=list)

    @property
    def deployments(self):
        return [(r.time, d) for r in self.records for e, d in r.events if e == "deploy"]


def _streams(seed):
    build, init, process, meas = np.random.SeedSequence(seed).spawn(4)
    return tuple(np.random.Generator(np.random.PCG64(s)) for s in (build, init, process, meas))


def random_feasible_point(region, rng):
    """Dirichlet-weighted mix of the region vertices."""
    V = region_vertices(region)
    if V.shape[0] == 0:
        raise EmptyRegion("cannot place a sensor in an empty region")
    return rng.dirichlet(np.ones(V.shape[0])) @ V


def synthesize_measurements(truth, sensors, assignment, noise, coverage, draws=None):
    """Measurements for every assigned (sensor, target) pair in coverage.

    ``truth`` holds target positions (L, 3) and ``sensors`` sensor
    positions (N, 3). ``draws`` holds standard normals indexed
    ``[sensor, target, axis]``; omit it for noise-free measurements.
    Returns the batch and the count of assigned pairs that were not seen.
    """
    sigmas = noise.sigmas
    batch, misses = [], 0
    for n in range(assignment.n_sensors):
        sp = np.asarray(sensors[n], dtype=float)
        for l in assignment.targets_of(n):
            tp = np.asarray(truth[l], dtype=float)
            if not in_coverage(sp, tp, coverage):
                misses += 1
                continue
            try:
                z = measure(tp, sp).vector
            except DegenerateGeometry:
                misses += 1
                continue
            if draws is not None:
                z = z + sigmas * draws[n, l]
            batch.append(MeasurementRecord(n, l, Measurement(*z), noise, sp.copy()))
    return batch, misses


class _World:
    """Mutable state of one run; ``run_scenario`` drives it step by step."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.F, _, self.Qd = build_transition(cfg.dynamics)
        self.weights = np.asarray(cfg.weights, dtype=float)
        self.L = cfg.n_targets
        self.spacing_steps = int(round(cfg.manager.deploy_spacing / cfg.dt))
        build, init, self.process_rng, self.meas_rng = _streams(cfg.seed)

        self.truth = [TargetState(p, v) for p, v in initial_targets(cfg, build)]
        sd = np.sqrt(np.asarray(cfg.p0_diag, dtype=float))
        self.estimates = [
            Estimate.initial(t.vector + sd * init.standard_normal(6), cfg.p0_diag)
            for t in self.truth
        ]
        self.fims = np.array([np.linalg.inv(e.P) for e in self.estimates])

        self.sensors = []
        rows = []
        for spec in cfg.sensors:
            group = [l for l, on in enumerate(spec.assignment) if on]
            if spec.position is None:
                region = coverage_region([self.truth[l].p for l in group], cfg.coverage)
                p = random_feasible_point(region, build)
            else:
                p = np.asarray(spec.position, dtype=float)
            self.sensors.append(SensorState(p, lag_tau=cfg.lag_tau, v_max=cfg.sensor_v_max))
            rows.append(spec.assignment)
        self.assignment = Assignment(rows, n_targets=self.L)
        self.commands = [s.p.copy() for s in self.sensors]

        self.pending = None
        self.last_deploy = 0 if self.sensors else None
        self.retry_step = 0
        self.empty_regions = set()

    # -- per-step pieces ---------------------------------------------------

    def draw_noise(self):
        """Fixed-shape draws so every mode consumes the streams identically."""
        accel = self.process_rng.standard_normal((self.L, 3))
        meas = self.meas_rng.standard_normal((self.cfg.manager.n_max_sensors, self.L, 3))
        return accel, meas

    def propagate_truth(self, accel):
        sigma = np.asarray(self.cfg.dynamics.sigma)
        noisy = self.cfg.truth_process_noise
        self.truth = [
            propagate_target(t, self.cfg.dynamics, sigma * a if noisy else None)
            for t, a in zip(self.truth, accel)
        ]

    def move_sensors(self):
        floor = self.cfg.coverage.h_min
        self.sensors = [
            step_sensor(s, c, self.cfg.dt, z_floor=floor) for s, c in zip(self.sensors, self.commands)
        ]

    def apply_pending(self, k, events):
        plan = self.pending
        if plan is None or plan.time_step != k:
            return
        self.pending = None
        self.sensors.append(SensorState(plan.position, lag_tau=self.cfg.lag_tau,
                                        v_max=self.cfg.sensor_v_max))
        self.commands.append(plan.position.copy())
        self.assignment = self.assignment.with_row(plan.group)
        self.last_deploy = k
        p = plan.position
        events.append(("deploy", f"sensor={len(self.sensors) - 1} group={_ids(plan.group)} "
                                 f"position={p[0]:.9g};{p[1]:.9g};{p[2]:.9g} score={plan.score:.9g}"))

    def estimate(self, meas_draws):
        cfg = self.cfg
        positions = np.array([s.p for s in self.sensors]).reshape(-1, 3)
        batch, misses = synthesize_measurements(
            [t.p for t in self.truth], positions, self.assignment, cfg.meas_noise,
            cfg.coverage, meas_draws)
        by_target = {}
        for rec in batch:
            by_target.setdefault(rec.target_id, []).append(rec)
        Jz = np.zeros((self.L, 6, 6))
        for l, e in enumerate(self.estimates):
            e = time_update(e, cfg.dynamics)
            recs = by_target.get(l, [])
            if recs:
                e = sequential_update(e, recs, cfg.gate)
                if self.weights[l] != 0:
                    for rec in recs:
                        try:
                            Jz[l] += measurement_fim_for_target(rec.sensor_p, e.x_hat[:3], rec.noise)
                        except DegenerateGeometry:
                            pass
            self.estimates[l] = e
        self.fims = fim_recursion_batch(self.fims, self.F, self.Qd, Jz)
        return misses

    def info_scores(self):
        return np.array([info_score(J) for J in self.fims])

    def manage(self, k, events):
        cfg = self.cfg
        if not cfg.deploy or self.pending is not None or k < self.retry_step:
            return
        if self.assignment.n_sensors >= cfg.manager.n_max_sensors:
            return
        earliest = 0 if self.last_deploy is None else self.last_deploy + self.spacing_steps
        x_hat = np.array([e.x_hat for e in self.estimates])
        need = detect_deployment_need(
            self.fims, self.assignment, self.weights, cfg.manager,
            target_states=x_hat,
            sensor_positions=[s.p for s in self.sensors],
            transition=(self.F, self.Qd),
            noise=cfg.meas_noise,
            coverage=cfg.coverage,
            step=k,
            earliest_step=earliest,
        )
        if need is None:
            return
        r, l_minus = need
        ahead = x_hat @ np.linalg.matrix_power(self.F, r).T
        groups = enumerate_candidate_groups(l_minus, self.weights, cfg.manager)
        try:
            plan = plan_deployment(groups, ahead[:, :3], self.weights,
                                   [cfg.meas_noise] * self.L, cfg.coverage, cfg.fw,
                                   time_step=k + r)
        except NoFeasibleCandidate:
            self.retry_step = k + self.spacing_steps
            events.append(("plan_failed", f"target={l_minus}"))
            return
        self.pending = plan
        events.append(("plan", f"target={l_minus} group={_ids(plan.group)} "
                               f"at={(k + r) * cfg.dt:.9g}"))

    def guide(self, events):
        cfg = self.cfg
        micros = {}
        commands = []
        for n, s in enumerate(self.sensors):
            assigned = [AssignedTarget(self.estimates[l].x_hat[:3], self.weights[l], cfg.meas_noise)
                        for l in self.assignment.targets_of(n)]
            if cfg.guidance_mode == "none" or not any(a.weight for a in assigned):
                commands.append(s.p.copy())
                micros[n] = 0.0
                continue
            t0 = time.perf_counter_ns()
            try:
                if cfg.guidance_mode == "optimal":
                    cmd = guide_optimal(s.p, assigned, cfg.coverage, cfg.fw)
                else:
                    cmd = guide_conditional_gradient(s.p, assigned, cfg.coverage)
                self.empty_regions.discard(n)
            except EmptyRegion:
                cmd = s.p.copy()
                if n not in self.empty_regions:
                    self.empty_regions.add(n)
                    events.append(("region_empty", f"sensor={n}"))
            micros[n] = (time.perf_counter_ns() - t0) / 1000.0
            commands.append(np.asarray(cmd, dtype=float))
        self.commands = commands
        return micros

    def perf_scores(self):
        """Each sensor's performance score at the true target positions."""
        out = {}
        for n, s in enumerate(self.sensors):
            obj = PerfObjective([
                AssignedTarget(self.truth[l].p, self.weights[l], self.cfg.meas_noise)
                for l in self.assignment.targets_of(n)
            ])
            try:
                out[n] = obj.score(s.p)
            except (DegenerateGeometry, RankDeficient):
                out[n] = np.inf
        return out

    def record(self, k, events, misses, micros):
        return StepRecord(
            step=k,
            time=k * self.cfg.dt,
            info_scores=self.info_scores(),
            truth=np.array([t.vector for t in self.truth]),
            estimates=np.array([e.x_hat for e in self.estimates]),
            sensor_positions={n: s.p.copy() for n, s in enumerate(self.sensors)},
            commands={n: c.copy() for n, c in enumerate(self.commands)},
            perf_scores=self.perf_scores(),
            guidance_micros=micros,
            events=events,
            misses=misses,
        )


def _ids(group):
    return ";".join(str(l) for l in group)


def run_scenario(cfg):
    """Simulate ``cfg`` and return one record per step, starting at t = 0.

    Step order: truth moves, sensors move toward their last command, a
    scheduled deployment lands, measurements are taken and filtered, the
    information matrices advance, the manager looks for a deployment need,
    and guidance issues the next commands.
    """
    validate(cfg)
    log = TraceLog(cfg.name, cfg.guidance_mode, tuple(cfg.weights))
    k = 0
    try:
        world = _World(cfg)
        events = []
        world.manage(0, events)
        micros = world.guide(events)
        log.records.append(world.record(0, events, 0, micros))
        for k in range(1, cfg.n_steps + 1):
            events = []
            accel, meas = world.draw_noise()
            world.propagate_truth(accel)
            world.move_sensors()
            world.apply_pending(k, events)
            misses = world.estimate(meas)
            world.manage(k, events)
            micros = world.guide(events)
            log.records.append(world.record(k, events, misses, micros))
    except SimulationError:
        raise
    except (SensorMgrError, np.linalg.LinAlgError, FloatingPointError) as exc:
        raise SimulationError(k, exc) from exc
    return log
