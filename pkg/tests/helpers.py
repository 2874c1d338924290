"""Seeded geometry generators shared by the test modules."""

import numpy as np

from sensormgr.information import AssignedTarget
from sensormgr.optimize import region_vertices
from sensormgr.sensing import Coverage, MeasurementNoise, coverage_region

NOISE = MeasurementNoise()
COVERAGE = Coverage(h_max=1000.0)


def target_cluster(rng, n, spread=300.0):
    """``n`` ground targets within ``spread`` metres of a random centre."""
    centre = rng.uniform(-2000, 2000, 2)
    xy = centre + rng.uniform(-spread, spread, (n, 2))
    return np.column_stack([xy, np.zeros(n)])


def off_axis_sensor(rng, targets, min_rho=50.0):
    """A sensor position at least ``min_rho`` horizontally from every target."""
    centre = targets.mean(axis=0)
    while True:
        p = centre + np.array([*rng.uniform(-400, 400, 2), rng.uniform(500, 1500)])
        rho = np.hypot(*(targets[:, :2] - p[:2]).T)
        if rho.min() >= min_rho:
            return p


def assigned(targets, weights=None, noise=NOISE):
    weights = np.ones(len(targets)) if weights is None else weights
    return [AssignedTarget(np.asarray(t, dtype=float), float(w), noise)
            for t, w in zip(targets, weights)]


def feasible_config(rng, n_targets, min_rho=50.0, coverage=COVERAGE):
    """Targets, a non-empty coverage region and a feasible sensor point
    whose horizontal distance to every target is at least ``min_rho``."""
    while True:
        targets = target_cluster(rng, n_targets, spread=250.0)
        region = coverage_region(targets, coverage)
        if region_vertices(region).shape[0] == 0:
            continue
        for _ in range(50):
            p = targets.mean(axis=0) + np.array(
                [*rng.uniform(-300, 300, 2), rng.uniform(coverage.h_min, coverage.h_max)])
            rho = np.hypot(*(targets[:, :2] - p[:2]).T)
            if region.contains(p) and rho.min() >= min_rho:
                return targets, region, p


ACCEPTANCE = []


def criterion(number, ok, detail):
    """Record and print one acceptance line; returns ``ok``."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok
