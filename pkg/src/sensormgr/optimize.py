"""Frank-Wolfe (conditional gradient) over a bounded polytope in R^3.

The linear subproblem is solved exactly by enumerating the polytope
vertices once per region and scanning them.
"""

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DegenerateGeometry, EmptyRegion

FEAS_TOL = 1e-9
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class FwConfig:
    step_rule: str = "harmonic"
    alpha_fixed: float = 0.5
    gap_tol: float = 1e-6
    max_iters: int = 500

    def __post_init__(self):
        if self.step_rule not in ("harmonic", "fixed"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if not 0 < self.alpha_fixed <= 1:
            raise ValueError("alpha_fixed must lie in (0, 1]")
        if self.gap_tol <= 0 or self.max_iters < 1:
            raise ValueError("gap_tol must be positive and max_iters >= 1")

    def step(self, j):
        if self.step_rule == "harmonic":
            return 2.0 / (j + 2.0)
        return self.alpha_fixed


@dataclass
class FwResult:
    p_star: np.ndarray
    s_star: float
    iters: int
    final_gap: float
    converged: bool
    gaps: list = field(default_factory=list, repr=False)


def _feasible_mask(A, b, pts):
    scale = np.abs(b)[None, :] + np.abs(pts) @ np.abs(A).T + 1.0
    return np.all(pts @ A.T - b[None, :] <= FEAS_TOL * scale, axis=1)


@lru_cache(maxsize=64)
def _triples(m):
    idx = np.array(list(itertools.combinations(range(m), 3)))
    idx.setflags(write=False)
    return idx


def enumerate_vertices(A, b):
    """All vertices of ``{p : A p <= b}`` from every triple of planes."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    # of several half-spaces sharing a normal only the tightest matters
    A, inverse = np.unique(A, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    tight = np.full(A.shape[0], np.inf)
    np.minimum.at(tight, inverse, b)
    b = tight
    m = A.shape[0]
    if m < 3:
        return np.empty((0, 3))
    idx = _triples(m)
    a1, a2, a3 = A[idx[:, 0]], A[idx[:, 1]], A[idx[:, 2]]
    c23 = np.cross(a2, a3)
    c31 = np.cross(a3, a1)
    c12 = np.cross(a1, a2)
    det = np.einsum("ij,ij->i", a1, c23)
    norms = (
        np.linalg.norm(a1, axis=1) * np.linalg.norm(a2, axis=1) * np.linalg.norm(a3, axis=1)
    )
    ok = np.abs(det) > 1e-12 * norms
    if not np.any(ok):
        return np.empty((0, 3))
    bb = b[idx[ok]]
    pts = (
        bb[:, 0:1] * c23[ok] + bb[:, 1:2] * c31[ok] + bb[:, 2:3] * c12[ok]
    ) / det[ok, None]
    pts = pts[_feasible_mask(A, b, pts)]
    if pts.size == 0:
        return np.empty((0, 3))
    scale = max(1.0, np.abs(pts).max())
    keys = np.round(pts / (scale * 1e-9))
    # unique() returns the keys lexicographically sorted; ordering on the
    # rounded keys keeps the tie-break independent of rounding noise
    _, first = np.unique(keys, axis=0, return_index=True)
    return pts[first]


def region_vertices(region):
    if region._vertices is None:
        region._vertices = enumerate_vertices(region.A, region.b)
    return region._vertices


def lp_vertex_min(gradient, anchor, region):
    """Vertex minimizing ``gradient . p`` over the region.

    ``anchor`` only shifts the objective by a constant. Near-ties within a
    relative ``1e-12`` go to the lexicographically smallest vertex.
    """
    del anchor
    V = region_vertices(region)
    if V.shape[0] == 0:
        raise EmptyRegion("region has no vertices")
    g = np.asarray(gradient, dtype=float)
    vals = V @ g
    best = vals.min()
    tol = TIE_RTOL * (np.abs(g).sum() * np.abs(V).max() + 1.0)
    # V is lexicographically sorted, so the first near-tie wins
    return V[np.flatnonzero(vals <= best + tol)[0]].copy()


def find_feasible_point(region):
    """Max-slack point among the vertices and their centroid."""
    V = region_vertices(region)
    if V.shape[0] == 0:
        raise EmptyRegion("region has no vertices")
    candidates = np.vstack([V, V.mean(axis=0)])
    norms = np.linalg.norm(region.A, axis=1)
    slack = ((region.b[None, :] - candidates @ region.A.T) / norms).min(axis=1)
    i = int(np.argmax(slack))
    if slack[i] <= 0:
        raise EmptyRegion("region has no interior")
    return candidates[i].copy()


def frank_wolfe(score, grad, region, config=None, x0=None):
    """Minimize ``score`` over ``region`` by conditional gradient steps.

    Stops once the gap ``grad(p) . (p - vertex)`` is at most
    ``gap_tol * max(1, |score(p)|)``. An iterate where the objective is
    undefined ends the solve early with ``converged=False``.
    """
    config = config or FwConfig()
    p = find_feasible_point(region) if x0 is None else np.asarray(x0, dtype=float).copy()
    gaps = []
    gap = np.inf
    converged = False
    iters = 0
    for j in range(config.max_iters):
        try:
            g = grad(p)
        except DegenerateGeometry:
            break
        vertex = lp_vertex_min(g, p, region)
        gap = float(g @ (p - vertex))
        gaps.append(gap)
        iters = j + 1
        if gap <= config.gap_tol * max(1.0, abs(score(p))):
            converged = True
            break
        p = p + config.step(j) * (vertex - p)
    try:
        s = float(score(p))
    except DegenerateGeometry:
        s = np.inf
    return FwResult(p, s, iters, gap, converged, gaps)
