"""Dense-matrix numerics shared by the estimators.

Matrices are plain 2-D float64 numpy arrays.  ``as_matrix`` is the entry
gate that enforces the container invariants (rectangular, finite); routines
in this module assume their inputs already passed it.  All tolerance
constants live in the single ``Tolerances`` record below instead of being
scattered through the code.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import (
    ContractError,
    DimensionError,
    FactorizationError,
    NumericError,
    RankDeficiencyError,
)


@dataclass(frozen=True)
class Tolerances:
    """Global numeric tolerances (relative unless noted)."""

    svd_reconstruction: float = 1e-10
    orthogonality: float = 1e-10
    symmetry: float = 1e-10
    eig_reconstruction: float = 1e-9
    spd_residual: float = 1e-8
    # numeric rank: singular values > rank_rel * max(sigma_max, 1) count
    rank_rel: float = 1e-8
    # full-rank test in min_norm_solution: sigma > full_rank_rel * sigma_max
    full_rank_rel: float = 1e-10
    power_rel: float = 1e-10
    power_max_iter: int = 10000
    # absolute threshold for support read-out from non-exactly-sparse iterates
    support_threshold: float = 1e-6


TOL = Tolerances()


def as_matrix(a, name="matrix"):
    """Validate and return ``a`` as a 2-D float64 array.

    Rejects non-rectangular input and NaN/Inf entries; this is the only
    place the container invariants are checked.
    """
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``a = u @ diag(s) @ vt`` with ``s`` non-increasing."""

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray


def svd(a):
    """Thin SVD of ``a``; raises NumericError if LAPACK does not converge."""
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD failed: {exc}") from exc
    return SvdResult(u, s, vt)


def l1_offdiag(a):
    """Sum of absolute values of the off-diagonal entries of a square matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"square matrix required, got shape {a.shape}")
    return float(np.abs(a).sum() - np.abs(np.diag(a)).sum())


def l1_entrywise(a):
    """Sum of absolute values of all entries (diagonal included)."""
    return float(np.abs(a).sum())


def linf_entrywise(a):
    """Largest absolute entry; 0 for an empty matrix."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.abs(a).max())


def nuclear_norm(a):
    """Sum of singular values."""
    try:
        s = np.linalg.svd(np.asarray(a, dtype=float), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD failed: {exc}") from exc
    return float(s.sum())


def spectral_norm(a, rel_tol=None, max_iter=None):
    """Largest singular value, by power iteration on the Gram matrix.

    Deterministic start vector; stops when the value estimate is stable to
    ``rel_tol`` or after ``max_iter`` sweeps.  Kept independent of ``svd``
    so the two can cross-check each other.
    """
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    rel_tol = TOL.power_rel if rel_tol is None else rel_tol
    max_iter = TOL.power_max_iter if max_iter is None else max_iter
    # iterate on the smaller side
    b = a if a.shape[1] <= a.shape[0] else a.T
    n, p = b.shape
    # fixed, deliberately irregular start vector
    v = 1.0 + (np.arange(p) * 37 % 11) / 11.0
    v /= np.linalg.norm(v)
    w = b @ v
    if np.linalg.norm(w) == 0.0:
        # start vector happens to lie in the null space; restart from the
        # heaviest column's basis vector
        j = int(np.argmax((b * b).sum(axis=0)))
        v = np.zeros(p)
        v[j] = 1.0
        w = b @ v
        if np.linalg.norm(w) == 0.0:
            return 0.0
    sigma = np.linalg.norm(w)
    prev_change = None
    for _ in range(max_iter):
        v = b.T @ w
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        v /= nv
        w = b @ v
        sigma_new = np.linalg.norm(w)
        change = abs(sigma_new - sigma)
        if change == 0.0:
            return float(sigma_new)
        # geometric convergence: extrapolate the remaining error from the
        # contraction ratio so small gaps do not stop the iteration early
        if prev_change is not None and change < prev_change:
            ratio = change / prev_change
            err_est = change * ratio / (1.0 - ratio)
            # the extrapolated error is itself an estimate; stop a factor
            # of 10 early so the returned value honours rel_tol
            if err_est <= 0.1 * rel_tol * max(sigma_new, 1e-300):
                return float(sigma_new)
        sigma = sigma_new
        prev_change = change
    return float(sigma)


def soft_threshold(x, t):
    """Shrink ``x`` toward zero by ``t``: sign(x) * max(|x| - t, 0). Elementwise."""
    if t < 0:
        raise ContractError(f"threshold must be nonnegative, got {t}")
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def svt(a, t):
    """Soft-threshold the singular values of ``a`` by ``t``.

    This is the proximal operator of ``t * nuclear_norm``; thresholded
    singular values are exact zeros.
    """
    if t < 0:
        raise ContractError(f"threshold must be nonnegative, got {t}")
    r = svd(np.asarray(a, dtype=float))
    s = np.maximum(r.s - t, 0.0)
    return (r.u * s) @ r.vt


def sym_eig(a):
    """Eigendecomposition of a symmetric matrix.

    Returns ``(w, q)`` with eigenvalues ``w`` non-increasing and
    eigenvectors in the columns of ``q``.  Raises ContractError if ``a``
    is not symmetric to the global tolerance.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"square matrix required, got shape {a.shape}")
    scale = max(1.0, linf_entrywise(a))
    if linf_entrywise(a - a.T) > TOL.symmetry * scale:
        raise ContractError("matrix is not symmetric within tolerance")
    w, q = np.linalg.eigh(0.5 * (a + a.T))
    return w[::-1].copy(), q[:, ::-1].copy()


def solve_spd(a, b):
    """Solve ``a @ x = b`` for symmetric positive definite ``a`` via Cholesky.

    Raises FactorizationError carrying the 1-based failing pivot index when
    ``a`` is not positive definite.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"square matrix required, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise DimensionError(
            f"right-hand side has {b.shape[0]} rows, expected {a.shape[0]}"
        )
    scale = max(1.0, linf_entrywise(a))
    if linf_entrywise(a - a.T) > TOL.symmetry * scale:
        raise ContractError("matrix is not symmetric within tolerance")
    c, info = scipy.linalg.lapack.dpotrf(0.5 * (a + a.T), lower=1)
    if info > 0:
        raise FactorizationError(
            f"matrix is not positive definite (pivot {info})", pivot=int(info)
        )
    if info < 0:
        raise NumericError(f"dpotrf: illegal argument {-info}")
    x, info = scipy.linalg.lapack.dpotrs(c, b, lower=1)
    if info != 0:
        raise NumericError(f"dpotrs: illegal argument {-info}")
    return x


def min_norm_solution(x, m):
    """Minimum-Frobenius-norm ``l`` with ``x @ l`` equal to the projection
    of ``m`` onto the column space of ``x``.

    Requires ``x`` to have full rank min(n, p); when the columns of ``m``
    already lie in col(x) this gives ``x @ l == m`` exactly.
    """
    x = np.asarray(x, dtype=float)
    m = np.asarray(m, dtype=float)
    if x.shape != m.shape:
        raise DimensionError(f"shape mismatch: {x.shape} vs {m.shape}")
    r = svd(x)
    if r.s[0] == 0.0 or r.s[-1] <= TOL.full_rank_rel * r.s[0]:
        raise RankDeficiencyError(
            f"matrix of shape {x.shape} is rank deficient "
            f"(smallest singular value {r.s[-1]:.3e})"
        )
    return (r.vt.T / r.s) @ (r.u.T @ m)


def numeric_rank(a, s=None):
    """Number of singular values above the global rank tolerance."""
    if s is None:
        a = np.asarray(a, dtype=float)
        if a.size == 0:
            return 0
        s = np.linalg.svd(a, compute_uv=False)
    s = np.asarray(s, dtype=float)
    if s.size == 0:
        return 0
    return int(np.count_nonzero(s > TOL.rank_rel * max(s[0], 1.0)))
