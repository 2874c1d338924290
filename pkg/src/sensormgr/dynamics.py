"""Near-constant-velocity target model and first-order-lag sensor kinematics."""

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

DEFAULT_DT = 0.05
DEFAULT_LAG_TAU = 1.0
DEFAULT_SENSOR_VMAX = 3.0


def _vec3(v):
    v = np.asarray(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite vector component")
    return v


@dataclass(frozen=True)
class TargetState:
    p: np.ndarray
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "p", _vec3(self.p))
        object.__setattr__(self, "v", _vec3(self.v))

    @property
    def vector(self):
        return np.concatenate([self.p, self.v])

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(x[:3], x[3:6])


@dataclass(frozen=True)
class DynamicsModel:
    dt: float = DEFAULT_DT
    sigma: tuple = (0.1, 0.1, 0.1)

    def __post_init__(self):
        if not self.dt >= 0:
            raise ValueError("dt must be non-negative")
        sigma = tuple(float(s) for s in self.sigma)
        if len(sigma) != 3 or min(sigma) < 0:
            raise ValueError("sigma must be three non-negative values")
        object.__setattr__(self, "sigma", sigma)


@dataclass(frozen=True)
class SensorState:
    p: np.ndarray
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    lag_tau: float = DEFAULT_LAG_TAU
    v_max: float = DEFAULT_SENSOR_VMAX

    def __post_init__(self):
        object.__setattr__(self, "p", _vec3(self.p))
        object.__setattr__(self, "v", _vec3(self.v))
        if self.lag_tau <= 0 or self.v_max <= 0:
            raise ValueError("lag_tau and v_max must be positive")


def build_transition(model):
    """Return ``(F, G, Qd)`` with ``Qd = G diag(sigma^2) G^T``."""
    F, G, Qd = _transition(model)
    return F.copy(), G.copy(), Qd.copy()


@lru_cache(maxsize=32)
def _transition(model):
    dt = model.dt
    eye = np.eye(3)
    F = np.block([[eye, dt * eye], [np.zeros((3, 3)), eye]])
    G = np.vstack([0.5 * dt**2 * eye, dt * eye])
    Q = np.diag(np.square(model.sigma))
    Qd = G @ Q @ G.T
    return F, G, 0.5 * (Qd + Qd.T)


def propagate_target(x, model, noise=None):
    F, G, _ = build_transition(model)
    nxt = F @ x.vector
    if noise is not None:
        nxt = nxt + G @ _vec3(noise)
    return TargetState.from_vector(nxt)


def step_sensor(s, command, dt, z_floor=-np.inf):
    """Advance a sensor one step toward ``command``.

    The desired velocity ``(command - p) / lag_tau`` is scaled down as a
    whole until every component is within ``v_max``, so the sensor moves
    along the segment toward the command. A step never passes the command
    (only possible when ``dt > lag_tau``).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    v = (_vec3(command) - s.p) / max(s.lag_tau, dt)
    peak = np.abs(v).max()
    if peak > s.v_max:
        v = v * (s.v_max / peak)
    p = s.p + v * dt
    if p[2] < z_floor:
        p[2] = z_floor
    return replace(s, p=p, v=v)
