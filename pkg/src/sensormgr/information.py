"""Fisher-information bookkeeping and D-optimality scores.

Two scores are tracked:

* the information score of a target, ``-ln det`` of the position block of
  its Fisher information matrix (lower means better known);
* the performance score of a sensor, the weighted sum over its assigned
  targets of ``-ln det`` of the position block of the measurement
  contribution, viewed as a function of the sensor position.
"""

from typing import NamedTuple

import numpy as np

from .errors import RankDeficient, SingularMatrix
from .numerics import RANK_RTOL, invert, log_det_psd, symmetrize
from .sensing import MeasurementNoise, observation_gradients, observation_hessians


class AssignedTarget(NamedTuple):
    position: np.ndarray
    weight: float
    noise: MeasurementNoise


def position_fim(sensor_p, target_p, noise):
    """3x3 measurement information about the target position."""
    g = observation_gradients(target_p, sensor_p)[0]
    return g.T @ np.diag(noise.sigmas**-2) @ g


def measurement_fim_for_target(sensor_p, target_p, noise):
    J = np.zeros((6, 6))
    J[:3, :3] = position_fim(sensor_p, target_p, noise)
    return J


def total_measurement_fim(contribs, tracked, weight):
    total = np.zeros((6, 6))
    if weight == 0:
        return total
    for J, on in zip(contribs, tracked):
        if on:
            total = total + J
    return total


def fim_recursion(J, F, Qd, Jz):
    """One step of ``J' = (Qd + F J^-1 F^T)^-1 + Jz``."""
    prior_cov = Qd + F @ invert(J) @ F.T
    return symmetrize(invert(symmetrize(prior_cov)) + Jz)


def fim_recursion_batch(J, F, Qd, Jz):
    """:func:`fim_recursion` over a stack of FIMs, shape (L, 6, 6)."""
    try:
        prior_cov = Qd + F @ np.linalg.inv(J) @ F.T
        out = np.linalg.inv(0.5 * (prior_cov + np.swapaxes(prior_cov, 1, 2))) + Jz
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from None
    return 0.5 * (out + np.swapaxes(out, 1, 2))


def info_score(J):
    try:
        return -log_det_psd(np.asarray(J)[:3, :3])
    except RankDeficient:
        return np.inf


def _cholesky_batch(psi):
    # same cutoff as log_det_psd, applied to a stack of 3x3 blocks
    tr = np.trace(psi, axis1=1, axis2=2)
    try:
        chol = np.linalg.cholesky(psi)
    except np.linalg.LinAlgError:
        raise RankDeficient("position information not positive definite") from None
    d = np.diagonal(chol, axis1=1, axis2=2) ** 2
    if np.any(d < RANK_RTOL * tr[:, None]):
        raise RankDeficient("factor diagonal below relative tolerance")
    return d


class PerfObjective:
    """Performance score of one sensor and its gradient, as functions of
    the sensor position.

    The assigned targets are packed once; the last evaluation is cached so
    a score and a gradient at the same point share the work.
    """

    def __init__(self, assigned):
        live = [a for a in assigned if a.weight != 0]
        self.empty = not live
        if self.empty:
            return
        self.targets = np.array([a.position for a in live], dtype=float)
        self.weights = np.array([a.weight for a in live], dtype=float)
        self.inv_var = np.array([a.noise.sigmas**-2 for a in live])
        self._key = None

    def _psi(self, p):
        p = np.asarray(p, dtype=float)
        key = p.tobytes()
        if key != self._key:
            sensors = np.broadcast_to(p, self.targets.shape)
            grads = observation_gradients(self.targets, sensors)
            wg = self.inv_var[:, :, None] * grads
            psi = np.swapaxes(grads, 1, 2) @ wg
            self._key, self._cache = key, (sensors, wg, psi, {})
        return self._cache

    def score(self, p):
        if self.empty:
            return 0.0
        _, _, psi, memo = self._psi(p)
        if "score" not in memo:
            try:
                d = _cholesky_batch(psi)
                memo["score"] = float(-(self.weights @ np.log(d).sum(axis=1)))
            except RankDeficient:
                memo["score"] = np.inf
        return memo["score"]

    def gradient(self, p):
        if self.empty:
            return np.zeros(3)
        sensors, wg, psi, memo = self._psi(p)
        if "grad" not in memo:
            _cholesky_batch(psi)
            hess = observation_hessians(self.targets, sensors)
            # d c / d sensor_k = tr(psi^-1 d psi / d target_k)
            #                  = 2 sum_i iv_i g_i^T psi^-1 hess_i[:, k]
            u = wg @ np.linalg.inv(psi)
            per_target = 2.0 * np.einsum("nij,nijk->nk", u, hess)
            memo["grad"] = self.weights @ per_target
        return memo["grad"].copy()


def perf_score(sensor_p, assigned):
    """Weighted D-optimality cost of a sensor at ``sensor_p``.

    Zero-weight targets are dropped; a rank-deficient term yields ``inf``.
    """
    return PerfObjective(assigned).score(sensor_p)


def perf_score_gradient(sensor_p, assigned):
    """Analytic gradient of :func:`perf_score` w.r.t. the sensor position.

    Per target this is ``-tr(psi^-1 d psi / d p_k)``; the derivative of
    ``psi`` comes from the observation Hessians. Raises RankDeficient when
    some ``psi`` cannot be inverted.
    """
    return PerfObjective(assigned).gradient(sensor_p)
