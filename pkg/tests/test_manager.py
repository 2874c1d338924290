import numpy as np
import pytest

from helpers import COVERAGE, NOISE, assigned
from sensormgr.dynamics import DynamicsModel, SensorState, build_transition, step_sensor
from sensormgr.errors import NoFeasibleCandidate
from sensormgr.information import PerfObjective, fim_recursion, info_score, position_fim
from sensormgr.manager import (
    Assignment,
    ManagerConfig,
    detect_deployment_need,
    enumerate_candidate_groups,
    guide_conditional_gradient,
    guide_optimal,
    plan_deployment,
    predicted_scores,
    solve_group,
)
from sensormgr.optimize import FwConfig, find_feasible_point, region_vertices
from sensormgr.sensing import coverage_region, in_coverage

MODEL = DynamicsModel()
F, _, QD = build_transition(MODEL)
P0_INV = np.linalg.inv(np.diag([1, 1, 1, 0.25, 0.25, 0.25]))

SQUARE = np.array([[-250.0, -250, 0], [250, -250, 0], [-250, 250, 0], [250, 250, 0]])


def states(positions):
    return np.column_stack([positions, np.zeros((len(positions), 3))])


def detect(fims, assignment, weights, cfg, positions, sensors, **kw):
    return detect_deployment_need(
        fims, assignment, weights, cfg, target_states=states(positions),
        sensor_positions=sensors, transition=(F, QD), noise=NOISE, coverage=COVERAGE, **kw)


def test_candidate_groups():
    cfg = ManagerConfig()
    groups = enumerate_candidate_groups(0, [1.0] * 10, cfg)
    assert len(groups) == 1 + 9 + 36 + 84
    assert groups[:3] == [(0,), (0, 1), (0, 2)]
    assert all(0 in g and len(g) <= 4 for g in groups)
    assert enumerate_candidate_groups(2, [1, 1, 1], ManagerConfig(v_max_targets=1)) == [(2,)]
    groups = enumerate_candidate_groups(0, [1, 0, 1, 0], cfg)
    assert groups == [(0,), (0, 2)]
    with pytest.raises(ValueError):
        enumerate_candidate_groups(1, [1, 0, 1, 0], cfg)


def test_forty_two_groups_for_seven_weighted():
    assert len(enumerate_candidate_groups(3, [1.0] * 7, ManagerConfig())) == 1 + 6 + 15 + 20


def test_predicted_scores_match_step_by_step_recursion():
    targets = np.array([[0.0, 0.0, 0.0], [100.0, 50.0, 0.0], [3000.0, 0.0, 0.0]])
    sensor = np.array([[40.0, 30.0, 800.0]])
    A = Assignment([[True, True, True]])
    weights = [1.0, 0.0, 1.0]
    fims = np.array([P0_INV] * 3)
    got = predicted_scores(fims, states(targets), sensor, A, weights, (F, QD), NOISE, COVERAGE, 15)
    J = [P0_INV.copy() for _ in range(3)]
    for r in range(15):
        for l in range(3):
            Jz = np.zeros((6, 6))
            if weights[l] and in_coverage(sensor[0], targets[l], COVERAGE):
                Jz[:3, :3] = position_fim(sensor[0], targets[l], NOISE)
            J[l] = fim_recursion(J[l], F, QD, Jz)
            assert got[r, l] == pytest.approx(info_score(J[l]), rel=1e-9, abs=1e-9)
    assert got[-1, 0] < got[-1, 1]  # tracked and weighted gains information


def aged_fims(steps, n=2):
    J = P0_INV.copy()
    for _ in range(steps):
        J = fim_recursion(J, F, QD, np.zeros((6, 6)))
    return np.array([J] * n)


def test_detection_breach_and_tie_break():
    cfg = ManagerConfig()
    fims = aged_fims(515)  # the threshold is crossed within the next few steps
    targets = np.array([[0.0, 0, 0], [500.0, 0, 0]])
    none = Assignment([], n_targets=2)
    r, l = detect(fims, none, [1.0, 1.0], cfg, targets, np.empty((0, 3)))
    assert 1 <= r <= cfg.predict_horizon
    assert l == 0
    fresh = np.array([P0_INV] * 2)
    assert detect(fresh, none, [1.0, 1.0], cfg, targets, np.empty((0, 3))) is None
    # the unweighted target cannot trigger a deployment
    mixed = np.array([P0_INV, fims[0]])
    assert detect(mixed, none, [1.0, 0.0], cfg, targets, np.empty((0, 3))) is None


def test_detection_spacing_and_sensor_cap():
    cfg = ManagerConfig(n_max_sensors=1)
    fims = aged_fims(515)
    targets = np.array([[0.0, 0, 0], [500.0, 0, 0]])
    one = Assignment([[True, False]])
    assert detect(fims, one, [1.0, 1.0], cfg, targets, np.array([[100.0, 0, 800]])) is None
    cfg = ManagerConfig()
    none = Assignment([], n_targets=2)
    r, _ = detect(fims, none, [1.0, 1.0], cfg, targets, np.empty((0, 3)), step=100, earliest_step=110)
    assert r == 10
    assert detect(fims, none, [1.0, 1.0], cfg, targets, np.empty((0, 3)),
                  step=100, earliest_step=200) is None


def test_detection_monotone_in_threshold():
    targets = np.array([[0.0, 0, 0], [500.0, 0, 0]])
    none = Assignment([], n_targets=2)
    for age in (480, 500, 515, 530):
        fims = aged_fims(age)
        prev = 0
        for s1 in np.linspace(3.0, 5.0, 9):
            hit = detect(fims, none, [1.0, 1.0], ManagerConfig(s1_threshold=s1), targets,
                         np.empty((0, 3)))
            r = np.inf if hit is None else hit[0]
            assert r >= prev
            prev = r


def test_plan_skips_empty_groups_and_picks_minimum():
    positions = np.array([[0.0, 0, 0], [200.0, 0, 0], [9000.0, 0, 0]])
    weights = [1.0, 1.0, 1.0]
    noises = [NOISE] * 3
    plan = plan_deployment([(0, 2), (0,), (0, 1)], positions, weights, noises, COVERAGE,
                           FwConfig(max_iters=100), time_step=7)
    assert plan.group in [(0,), (0, 1)]
    assert plan.time_step == 7
    for g in [(0,), (0, 1)]:
        assert plan.score <= solve_group(g, positions, weights, noises, COVERAGE,
                                         FwConfig(max_iters=100)).s_star
    with pytest.raises(NoFeasibleCandidate):
        plan_deployment([(0, 2)], positions, weights, noises, COVERAGE)


def test_single_candidate_equals_frank_wolfe():
    positions = SQUARE
    weights, noises = [1.0] * 4, [NOISE] * 4
    fw = FwConfig(max_iters=100)
    res = solve_group((0, 1, 2, 3), positions, weights, noises, COVERAGE, fw)
    plan = plan_deployment([(0, 1, 2, 3)], positions, weights, noises, COVERAGE, fw)
    np.testing.assert_array_equal(plan.position, res.p_star)
    assert plan.score == res.s_star
    assert coverage_region(positions, COVERAGE).contains(plan.position)


def test_guide_cgd_commands():
    items = assigned(SQUARE)
    region = coverage_region(SQUARE, COVERAGE)
    # outside the region: fall back to an interior point
    np.testing.assert_array_equal(
        guide_conditional_gradient([2000.0, 0, 800], items, COVERAGE), find_feasible_point(region))
    # symmetric layout: the optimum is the centre of the floor slice
    p = np.array([0.0, 0.0, COVERAGE.h_min + 1.0])
    cmd = guide_conditional_gradient(p, items, COVERAGE)
    g = PerfObjective(items).gradient(p)
    assert g @ (cmd - p) <= 0
    assert region.contains(cmd)
    # at a vertex minimizing the linearization the sensor holds
    v = guide_conditional_gradient(np.array([30.0, 20.0, 900.0]), items, COVERAGE)
    held = guide_conditional_gradient(v, items, COVERAGE)
    obj = PerfObjective(items)
    if obj.gradient(v) @ (v - held) <= 0:
        np.testing.assert_array_equal(held, v)


def test_work_ratio_of_guidance_laws():
    items = assigned(SQUARE)

    class Counting(PerfObjective):
        calls = 0

        def gradient(self, p):
            Counting.calls += 1
            return super().gradient(p)

    rng = np.random.default_rng(61)
    region = coverage_region(SQUARE, COVERAGE)
    for _ in range(10):
        while True:
            p = np.array([*rng.uniform(-60, 60, 2), rng.uniform(500, 1000)])
            if region.contains(p):
                break
        Counting.calls = 0
        guide_optimal(p, items, COVERAGE, FwConfig(max_iters=50), objective=Counting(items))
        opt = Counting.calls
        Counting.calls = 0
        guide_conditional_gradient(p, items, COVERAGE, objective=Counting(items))
        assert opt >= Counting.calls == 1
        assert opt > 1


def test_cgd_guided_sensor_stays_feasible_and_improves():
    groups = [SQUARE, SQUARE[:2], SQUARE[[0]], np.array([[0.0, 0, 0], [600, 300, 0], [100, 500, 0]])]
    rng = np.random.default_rng(62)
    for targets in groups:
        items = assigned(targets)
        obj = PerfObjective(items)
        region = coverage_region(targets, COVERAGE)
        for _ in range(3):
            # feasible start: midpoint of the interior point and a random vertex
            V = region_vertices(region)
            start = 0.5 * find_feasible_point(region) + 0.5 * V[rng.integers(len(V))]
            s = SensorState(start, lag_tau=1.0, v_max=3.0)
            first = obj.score(s.p)
            for _ in range(200):
                cmd = guide_conditional_gradient(s.p, items, COVERAGE, objective=obj)
                s = step_sensor(s, cmd, 0.05, z_floor=COVERAGE.h_min)
                assert region.slacks(s.p).min() >= -1e-6
            assert obj.score(s.p) <= first + 1e-9
