"""Fusion-center decisions: when to deploy a sensor, where and for which
target group, and how to steer the sensors already deployed."""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry, EmptyRegion, NoFeasibleCandidate, RankDeficient
from .information import AssignedTarget, PerfObjective, fim_recursion_batch
from .optimize import FwConfig, find_feasible_point, frank_wolfe, lp_vertex_min, region_vertices
from .sensing import coverage_mask, coverage_region, observation_gradients


@dataclass(frozen=True)
class ManagerConfig:
    s1_threshold: float = 4.0
    v_max_targets: int = 4
    n_max_sensors: int = 5
    deploy_spacing: float = 5.0
    predict_horizon: int = 20

    def __post_init__(self):
        if min(self.s1_threshold, self.v_max_targets, self.n_max_sensors,
               self.deploy_spacing, self.predict_horizon) <= 0:
            raise ValueError("manager parameters must be positive")


class Assignment:
    """N x L boolean matrix; row n marks the targets sensor n tracks."""

    def __init__(self, matrix, n_targets=None):
        m = np.asarray(matrix, dtype=bool)
        if m.size == 0:
            m = np.zeros((0, n_targets or 0), dtype=bool)
        self.matrix = np.atleast_2d(m)

    @property
    def n_sensors(self):
        return self.matrix.shape[0]

    @property
    def n_targets(self):
        return self.matrix.shape[1]

    def targets_of(self, n):
        return [int(i) for i in np.flatnonzero(self.matrix[n])]

    def sensors_of(self, l):
        return [int(i) for i in np.flatnonzero(self.matrix[:, l])]

    def with_row(self, group):
        row = np.zeros((1, self.n_targets), dtype=bool)
        row[0, list(group)] = True
        return Assignment(np.vstack([self.matrix, row]))

    def __repr__(self):
        return f"Assignment({self.matrix.astype(int).tolist()})"


@dataclass(frozen=True)
class DeploymentPlan:
    time_step: int
    group: tuple
    position: np.ndarray
    score: float


def predicted_scores(fims, target_states, sensor_positions, assignment, weights,
                     transition, noise, coverage, horizon):
    """Information scores ``r = 1..horizon`` steps ahead, shape (horizon, L).

    Sensors stay where they are; targets move with the deterministic
    transition and contribute measurement information only while covered.
    """
    F, Qd = transition
    J = np.array(fims, dtype=float)
    x = np.array(target_states, dtype=float)
    L = J.shape[0]
    pairs = [(n, l) for n in range(assignment.n_sensors) for l in assignment.targets_of(n)
             if weights[l] != 0]
    inv_var = noise.sigmas**-2
    out = np.empty((horizon, L))
    if pairs:
        sensor_of = np.array([n for n, _ in pairs])
        target_of = np.array([l for _, l in pairs])
        sp = np.asarray(sensor_positions, dtype=float).reshape(-1, 3)[sensor_of]
    for r in range(horizon):
        x = x @ F.T
        Jz = np.zeros((L, 6, 6))
        if pairs:
            tp = x[target_of, :3]
            live = coverage_mask(sp, tp, coverage)
            if live.any():
                g = observation_gradients(tp[live], sp[live])
                psi = np.swapaxes(g, 1, 2) @ (inv_var[None, :, None] * g)
                np.add.at(Jz, (target_of[live], slice(0, 3), slice(0, 3)), psi)
        J = fim_recursion_batch(J, F, Qd, Jz)
        sign, logdet = np.linalg.slogdet(J[:, :3, :3])
        out[r] = np.where(sign > 0, -logdet, np.inf)
    return out


def detect_deployment_need(fims, assignment, weights, cfg, *, target_states,
                           sensor_positions, transition, noise, coverage,
                           step=0, earliest_step=0):
    """Look ahead for the first predicted breach of the score threshold.

    Returns ``(r, l_minus)`` or None. ``r`` is pushed back to the earliest
    step the deployment spacing allows; a breach that can only be served
    beyond the horizon yields None.
    """
    if assignment.n_sensors >= cfg.n_max_sensors:
        return None
    if step + cfg.predict_horizon < earliest_step:
        return None
    scores = predicted_scores(fims, target_states, sensor_positions, assignment, weights,
                              transition, noise, coverage, cfg.predict_horizon)
    weighted = np.asarray(weights) > 0
    for r in range(cfg.predict_horizon):
        row = np.where(weighted, scores[r], -np.inf)
        breach = row > cfg.s1_threshold
        if breach.any():
            worst = row.max()
            l_minus = int(np.flatnonzero(breach & (row == worst))[0])
            r_eff = max(r + 1, earliest_step - step)
            if r_eff > cfg.predict_horizon:
                return None
            return r_eff, l_minus
    return None


def enumerate_candidate_groups(l_minus, weights, cfg):
    """Groups containing ``l_minus`` drawn from the weighted targets, sized
    at most ``cfg.v_max_targets``, ordered by size then lexicographically."""
    if weights[l_minus] <= 0:
        raise ValueError("l_minus must carry a positive weight")
    others = [l for l, w in enumerate(weights) if w > 0 and l != l_minus]
    groups = []
    for k in range(cfg.v_max_targets):
        for combo in itertools.combinations(others, k):
            groups.append(tuple(sorted((l_minus,) + combo)))
    groups.sort(key=lambda g: (len(g), g))
    return groups


def _objective(group, positions, weights, noises):
    return PerfObjective(
        [AssignedTarget(positions[l], weights[l], noises[l]) for l in group]
    )


def _vertex_start(region, objective):
    best, best_s = None, np.inf
    for v in region_vertices(region):
        try:
            s = objective.score(v)
        except DegenerateGeometry:
            continue
        if s < best_s:
            best, best_s = v, s
    return best


def solve_group(group, positions, weights, noises, coverage, fw_cfg=None):
    """Placement problem for one target group: best sensor position and score."""
    region = coverage_region([positions[l] for l in group], coverage)
    if region_vertices(region).shape[0] == 0:
        raise EmptyRegion(f"group {group} has no feasible sensor position")
    objective = _objective(group, positions, weights, noises)
    x0 = _vertex_start(region, objective)
    return frank_wolfe(objective.score, objective.gradient, region, fw_cfg, x0=x0)


def plan_deployment(candidates, predicted_target_positions, weights, noises, coverage,
                    fw_cfg=None, time_step=0):
    """Best (group, position) over the candidates by minimum solved score."""
    best = None
    for group in candidates:
        try:
            res = solve_group(group, predicted_target_positions, weights, noises, coverage, fw_cfg)
        except EmptyRegion:
            continue
        key = (res.s_star, len(group), tuple(res.p_star))
        if best is None or key < best[0]:
            best = (key, group, res)
    if best is None:
        raise NoFeasibleCandidate("every candidate group has an empty feasible region")
    _, group, res = best
    return DeploymentPlan(time_step, tuple(group), res.p_star, res.s_star)


def _assigned_region(assigned, coverage):
    return coverage_region([a.position for a in assigned], coverage)


def guide_optimal(sensor_p, assigned, coverage, fw_cfg=None, objective=None):
    """Command the full Frank-Wolfe solution of the placement problem."""
    region = _assigned_region(assigned, coverage)
    objective = objective or PerfObjective(assigned)
    p = np.asarray(sensor_p, dtype=float)
    x0 = p if region.contains(p) else find_feasible_point(region)
    return frank_wolfe(objective.score, objective.gradient, region, fw_cfg or FwConfig(), x0=x0).p_star


def guide_conditional_gradient(sensor_p, assigned, coverage, objective=None):
    """Command the vertex of one linear subproblem.

    Holds position when the vertex is not a descent direction; falls back
    to a feasible interior point when the sensor is outside its region.
    """
    region = _assigned_region(assigned, coverage)
    p = np.asarray(sensor_p, dtype=float)
    if not region.contains(p):
        return find_feasible_point(region)
    objective = objective or PerfObjective(assigned)
    try:
        g = objective.gradient(p)
    except (DegenerateGeometry, RankDeficient):
        return p.copy()
    vertex = lp_vertex_min(g, p, region)
    if g @ (p - vertex) <= 0:
        return p.copy()
    return vertex
