"""Sparse direct solve and 2-norm condition number estimation."""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import AccuracyError, SolverError

DENSE_LIMIT = 4000
_ITER_TOL = 1e-3
_MAX_ITERS = 20000


def solve(system):
    """LU solve of a LinearSystem; returns (u_h, p_h, multiplier)."""
    mat, rhs = system.matrix.tocsc(), system.rhs
    try:
        lu = spla.splu(mat)
        x = lu.solve(rhs)
    except (RuntimeError, ValueError) as exc:
        raise SolverError(f"sparse LU factorization failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("solver produced non-finite values")
    res = np.linalg.norm(mat @ x - rhs)
    scale = max(np.linalg.norm(rhs), 1.0)
    if res / scale > 1e-10:
        raise AccuracyError(
            f"solver residual {res / scale:.2e} exceeds 1e-10 relative")
    return system.split(x)


def _condition_iterative(mat, rng):
    """sigma_max / sigma_min via power iteration on S^T S and inverse
    iteration through a sparse LU of S."""
    n = mat.shape[0]
    matT = mat.T.tocsr()
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    smax_sq = 0.0
    for _ in range(_MAX_ITERS):
        y = matT @ (mat @ x)
        new = float(x @ y)
        x = y / np.linalg.norm(y)
        if abs(new - smax_sq) <= 0.5 * _ITER_TOL * abs(new):
            smax_sq = new
            break
        smax_sq = new
    try:
        lu = spla.splu(mat.tocsc())
    except RuntimeError as exc:
        raise SolverError(f"matrix is singular: {exc}") from exc
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    smin_sq = np.inf
    for _ in range(_MAX_ITERS):
        # inverse iteration on S S^T (same singular values as S^T S)
        y = lu.solve(np.asarray(lu.solve(x), dtype=float), trans="T")
        x = y / np.linalg.norm(y)
        inv_new = float(np.linalg.norm(matT @ x) ** 2)
        if abs(inv_new - smin_sq) <= 0.5 * _ITER_TOL * abs(inv_new):
            smin_sq = inv_new
            break
        smin_sq = inv_new
    return float(np.sqrt(smax_sq / smin_sq))


def condition_number_l2(mat, seed=0):
    """Spectral condition number of a sparse matrix.

    Dense SVD below DENSE_LIMIT rows; otherwise power/inverse iteration
    accurate to about 0.1 percent.
    """
    mat = sp.csr_matrix(mat)
    if mat.shape[0] != mat.shape[1]:
        raise SolverError("condition number requires a square matrix")
    if mat.shape[0] <= DENSE_LIMIT:
        svals = np.linalg.svd(mat.toarray(), compute_uv=False)
        if svals[-1] == 0.0:
            raise SolverError("matrix is singular")
        return float(svals[0] / svals[-1])
    return _condition_iterative(mat, np.random.default_rng(seed))
