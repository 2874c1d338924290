"""Small dense symmetric-matrix kernel (3x3 and 6x6)."""

import warnings

import numpy as np
import scipy.linalg

from .errors import RankDeficient, SingularMatrix

PIVOT_RTOL = 1e-12
SYMMETRY_RTOL = 1e-9
RANK_RTOL = 1e-12


def _as_square(m):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _check_symmetric(m):
    scale = max(1.0, np.abs(m).sum(axis=1).max())
    if np.abs(m - m.T).max() > SYMMETRY_RTOL * scale:
        raise ValueError("matrix is not symmetric")


def symmetrize(m):
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


def invert(m):
    """Inverse via LU with partial pivoting.

    Raises SingularMatrix when a pivot falls below ``1e-12`` times the
    infinity norm of its source row.
    """
    m = _as_square(m)
    n = m.shape[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    perm = np.arange(n)
    for i, p in enumerate(piv):
        perm[i], perm[p] = perm[p], perm[i]
    row_norms = np.abs(m).sum(axis=1)[perm]
    pivots = np.abs(np.diag(lu))
    if np.any(pivots < PIVOT_RTOL * row_norms) or np.any(row_norms == 0.0):
        raise SingularMatrix("pivot below relative tolerance")
    return scipy.linalg.lu_solve((lu, piv), np.eye(n), check_finite=False)


def log_det_psd(m):
    """ln det of a symmetric PSD matrix from its Cholesky factor.

    Raises RankDeficient when a squared factor diagonal drops below
    ``1e-12 * trace(m)`` or the factorization breaks down.
    """
    m = _as_square(m)
    _check_symmetric(m)
    tr = np.trace(m)
    if tr <= 0.0:
        raise RankDeficient("non-positive trace")
    try:
        chol = np.linalg.cholesky(symmetrize(m))
    except np.linalg.LinAlgError as exc:
        raise RankDeficient(str(exc)) from None
    d = np.diag(chol) ** 2
    if np.any(d < RANK_RTOL * tr):
        raise RankDeficient("factor diagonal below relative tolerance")
    return float(np.sum(np.log(d)))


def min_eigenvalue(m):
    m = _as_square(m)
    _check_symmetric(m)
    return float(np.linalg.eigvalsh(symmetrize(m))[0])
