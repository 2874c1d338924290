"""Sequential extended Kalman filter for a single target."""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dynamics import build_transition
from .errors import DegenerateGeometry, InnovationGateExceeded
from .numerics import symmetrize
from .sensing import Measurement, MeasurementNoise, jacobian_wrt_target, measure

log = logging.getLogger(__name__)

DEFAULT_P0 = (1.0, 1.0, 1.0, 0.25, 0.25, 0.25)


@dataclass(frozen=True)
class Estimate:
    x_hat: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x_hat, dtype=float).reshape(6)
        P = np.asarray(self.P, dtype=float).reshape(6, 6)
        object.__setattr__(self, "x_hat", x)
        object.__setattr__(self, "P", P)

    @classmethod
    def initial(cls, x0, p0_diag=DEFAULT_P0):
        return cls(x0, np.diag(p0_diag))


class MeasurementRecord(NamedTuple):
    sensor_id: int
    target_id: int
    z: Measurement
    noise: MeasurementNoise
    sensor_p: np.ndarray


def wrap_angle(a):
    """Map to (-pi, pi]."""
    w = np.mod(a + np.pi, 2 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def time_update(e, model):
    F, _, Qd = build_transition(model)
    return Estimate(F @ e.x_hat, symmetrize(F @ e.P @ F.T + Qd))


def kalman_fold(e, residual, H, R):
    """Fold one measurement into ``e`` given its residual and linearization."""
    PHt = e.P @ H.T
    S = H @ PHt + R
    K = np.linalg.solve(S.T, PHt.T).T
    x = e.x_hat + K @ residual
    P = e.P - K @ H @ e.P
    return Estimate(x, symmetrize(P))


def _innovation(e, rec):
    target_p = e.x_hat[:3]
    predicted = measure(target_p, rec.sensor_p)
    H = jacobian_wrt_target(target_p, rec.sensor_p)
    residual = rec.z.vector - predicted.vector
    residual[0] = wrap_angle(residual[0])
    return residual, H


def sequential_update(e, batch, gate=np.inf):
    """Fold a batch of measurements in ascending (sensor_id, target_id) order.

    Each fold relinearizes at the running estimate. Measurements with
    degenerate geometry or a normalized innovation squared above ``gate``
    are skipped and logged.
    """
    for rec in sorted(batch, key=lambda r: (r.sensor_id, r.target_id)):
        R = rec.noise.covariance
        try:
            residual, H = _innovation(e, rec)
            if np.isfinite(gate):
                S = H @ e.P @ H.T + R
                nis = float(residual @ np.linalg.solve(S, residual))
                if nis > gate:
                    raise InnovationGateExceeded(f"NIS {nis:.3g} > gate {gate:.3g}")
        except (DegenerateGeometry, InnovationGateExceeded) as exc:
            log.info("skipping sensor %s target %s: %s", rec.sensor_id, rec.target_id, exc)
            continue
        e = kalman_fold(e, residual, H, R)
    return e
