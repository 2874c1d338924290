"""Azimuth/elevation/range observation model, its derivatives, and the
polyhedral coverage geometry of a downward-looking sensor."""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegenerateGeometry

EPS_H = 1e-6
EPS_FACE = 1e-6
EPS_ALT = 1e-3
CONTAIN_TOL = 1e-9  # absorbs rounding for points computed to lie on a face


class Measurement(NamedTuple):
    az: float
    el: float
    range: float

    @property
    def vector(self):
        return np.array([self.az, self.el, self.range])


@dataclass(frozen=True)
class MeasurementNoise:
    sigma_az: float = 0.007
    sigma_el: float = 0.007
    sigma_r: float = 0.05

    def __post_init__(self):
        if min(self.sigma_az, self.sigma_el, self.sigma_r) <= 0:
            raise ValueError("measurement noise standard deviations must be positive")

    @property
    def sigmas(self):
        return np.array([self.sigma_az, self.sigma_el, self.sigma_r])

    @property
    def covariance(self):
        return np.diag(self.sigmas**2)


@dataclass(frozen=True)
class Coverage:
    theta_x: float = np.deg2rad(60.0)
    theta_y: float = np.deg2rad(60.0)
    h_min: float = 500.0
    h_max: float = 2000.0
    xy_bound: float = 10_000.0

    def __post_init__(self):
        problems = []
        for name in ("theta_x", "theta_y"):
            if not 0 < getattr(self, name) < np.pi:
                problems.append(f"{name} must lie in (0, pi)")
        if not self.h_min < self.h_max:
            problems.append("h_min must be below h_max")
        if self.xy_bound <= 0:
            problems.append("xy_bound must be positive")
        if problems:
            raise ValueError("; ".join(problems))


@dataclass
class FeasibleRegion:
    """Intersection of half-spaces ``A @ p <= b``.

    ``box`` flags the rows that come from the operational box and the
    altitude ceiling rather than from a target's coverage pyramid.
    """

    A: np.ndarray
    b: np.ndarray
    box: np.ndarray = None
    _vertices: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if self.A.shape != (self.b.size, 3) or self.b.size == 0:
            raise ValueError("region needs a non-empty (m, 3) normal array and m offsets")
        if self.box is None:
            self.box = np.zeros(self.b.size, dtype=bool)
        self.box = np.asarray(self.box, dtype=bool).reshape(-1)

    @classmethod
    def from_halfspaces(cls, halfspaces):
        normals, offsets = zip(*halfspaces)
        return cls(np.array(normals, dtype=float), np.array(offsets, dtype=float))

    @classmethod
    def box_region(cls, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        eye = np.eye(3)
        return cls(np.vstack([eye, -eye]), np.concatenate([hi, -lo]))

    @property
    def halfspaces(self):
        return [(a.copy(), float(c)) for a, c in zip(self.A, self.b)]

    def slacks(self, p):
        return self.b - self.A @ np.asarray(p, dtype=float)

    def contains(self, p, tol=CONTAIN_TOL):
        return bool(np.all(self.slacks(p) >= -tol))


def _relative(target_p, sensor_p):
    d = np.asarray(target_p, dtype=float) - np.asarray(sensor_p, dtype=float)
    if d.ndim == 1:
        d = d[None, :]
    rho2 = d[:, 0] ** 2 + d[:, 1] ** 2
    if np.any(rho2 <= EPS_H**2):
        raise DegenerateGeometry("sensor directly above target; azimuth undefined")
    return d, rho2


def measure(target_p, sensor_p):
    (d,), rho2 = _relative(target_p, sensor_p)
    x, y, z = d
    rho = np.sqrt(rho2[0])
    az = float(np.arctan2(x, y))
    return Measurement(
        np.pi if az == -np.pi else az,
        float(np.arctan2(z, rho)),
        float(np.sqrt(rho2[0] + z * z)),
    )


def observation_gradients(target_p, sensor_p):
    """Gradients of (az, el, range) w.r.t. target position, shape (n, 3, 3).

    Accepts a single pair or stacked ``(n, 3)`` targets/sensors.
    """
    d, q = _relative(target_p, sensor_p)
    x, y, z = d.T
    rho = np.sqrt(q)
    R = q + z * z
    r = np.sqrt(R)
    out = np.empty((d.shape[0], 3, 3))
    out[:, 0, 0] = y / q
    out[:, 0, 1] = -x / q
    out[:, 0, 2] = 0.0
    out[:, 1, 0] = -x * z / (R * rho)
    out[:, 1, 1] = -y * z / (R * rho)
    out[:, 1, 2] = rho / R
    out[:, 2] = d / r[:, None]
    return out


def observation_hessians(target_p, sensor_p):
    """Second derivatives of (az, el, range) w.r.t. target position.

    Shape ``(n, 3, 3, 3)`` indexed ``[pair, measurement, i, j]``.
    """
    d, q = _relative(target_p, sensor_p)
    x, y, z = d.T
    R = q + z * z
    rho = np.sqrt(q)
    xx, yy, zz, xy = x * x, y * y, z * z, x * y
    q2 = q * q
    zero = np.zeros_like(x)

    az_xy = (xx - yy) / q2

    den = rho * q * R * R
    side = (zz - q) / (rho * R * R)
    el_xy = xy * z * (3 * q + zz) / den
    el_xz = x * side
    el_yz = y * side

    inv_r = 1.0 / np.sqrt(R)
    inv_r3 = inv_r / R
    r_xy = -xy * inv_r3
    r_xz = -x * z * inv_r3
    r_yz = -y * z * inv_r3

    flat = np.stack(
        [
            -2 * xy / q2, az_xy, zero,
            az_xy, 2 * xy / q2, zero,
            zero, zero, zero,
            z * ((2 * xx - yy) * q - yy * zz) / den, el_xy, el_xz,
            el_xy, z * ((2 * yy - xx) * q - xx * zz) / den, el_yz,
            el_xz, el_yz, -2 * z * rho / (R * R),
            inv_r - xx * inv_r3, r_xy, r_xz,
            r_xy, inv_r - yy * inv_r3, r_yz,
            r_xz, r_yz, inv_r - zz * inv_r3,
        ],
        axis=1,
    )
    return flat.reshape(-1, 3, 3, 3)


def jacobian_wrt_target(target_p, sensor_p):
    """3x6 observation matrix; the velocity columns are identically zero."""
    H = np.zeros((3, 6))
    H[:, :3] = observation_gradients(target_p, sensor_p)[0]
    return H


def jacobian_wrt_sensor(target_p, sensor_p):
    return -observation_gradients(target_p, sensor_p)[0]


def _pyramid(target, cov):
    tx = np.tan(cov.theta_x / 2)
    ty = np.tan(cov.theta_y / 2)
    xl, yl, zl = target
    nx = np.hypot(1.0, tx)
    ny = np.hypot(1.0, ty)
    rows = [
        ((1.0, 0.0, -tx), xl - tx * zl, nx),
        ((-1.0, 0.0, -tx), -xl - tx * zl, nx),
        ((0.0, 1.0, -ty), yl - ty * zl, ny),
        ((0.0, -1.0, -ty), -yl - ty * zl, ny),
    ]
    A = np.array([r[0] for r in rows]) / np.array([[r[2]] for r in rows])
    b = np.array([r[1] / r[2] for r in rows]) - EPS_FACE
    return A, b


def coverage_region(targets, cov):
    """Sensor positions that see every target in ``targets``.

    Each target contributes four pyramid faces; the altitude floor, the
    altitude ceiling and the operational box are appended once.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.shape[0] == 0:
        raise ValueError("coverage_region needs at least one target")
    blocks_A, blocks_b = [], []
    for t in targets:
        A, b = _pyramid(t, cov)
        blocks_A.append(A)
        blocks_b.append(b)
    blocks_A.append([[0.0, 0.0, -1.0]])
    blocks_b.append([-(cov.h_min + EPS_ALT)])
    n_cov = 4 * len(targets) + 1
    box_A = [
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
    ]
    box_b = [cov.h_max, cov.xy_bound, cov.xy_bound, cov.xy_bound, cov.xy_bound]
    A = np.vstack(blocks_A + [box_A])
    b = np.concatenate([np.ravel(x) for x in blocks_b] + [box_b])
    box = np.zeros(b.size, dtype=bool)
    box[n_cov:] = True
    return FeasibleRegion(A, b, box)


def in_coverage(sensor_p, target_p, cov):
    """Whether the sensor sees the target: the pyramid faces of
    ``coverage_region([target_p], cov)`` and its altitude floor hold,
    margins included. Points on the raw pyramid surface are outside."""
    sx, sy, sz = (float(v) for v in sensor_p)
    tx_, ty_, tz_ = (float(v) for v in target_p)
    if sz < cov.h_min + EPS_ALT - CONTAIN_TOL:
        return False
    h = sz - tz_
    for dev, half in ((abs(sx - tx_), cov.theta_x / 2), (abs(sy - ty_), cov.theta_y / 2)):
        t = np.tan(half)
        # same normalization as the region rows
        if (dev - t * h) / np.hypot(1.0, t) > -EPS_FACE + CONTAIN_TOL:
            return False
    return True


def coverage_mask(sensor_p, target_p, cov):
    """:func:`in_coverage` over stacked ``(n, 3)`` sensor/target pairs."""
    s = np.atleast_2d(np.asarray(sensor_p, dtype=float))
    t = np.atleast_2d(np.asarray(target_p, dtype=float))
    h = s[:, 2] - t[:, 2]
    ok = s[:, 2] >= cov.h_min + EPS_ALT - CONTAIN_TOL
    for axis, half in ((0, cov.theta_x / 2), (1, cov.theta_y / 2)):
        tan = np.tan(half)
        dev = np.abs(s[:, axis] - t[:, axis])
        ok &= (dev - tan * h) / np.hypot(1.0, tan) <= -EPS_FACE + CONTAIN_TOL
    return ok
