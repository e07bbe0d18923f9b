"""Regression-based sparse + low-rank estimator.

Estimates a pair (S, L) with zero diagonal sum by minimizing

    0.5 * ||X(I - S - L)||_F^2  +  lam * |S|_{l1,off}  +  mu * ||XL||_*

over all p x p matrices subject to diag(S + L) = 0.  The solver alternates
three exactly-solvable blocks: cyclic coordinate descent on the
off-diagonal entries of S, singular value thresholding for L (through the
product M = XL), and restoration of the diagonal constraint.  ``mu = inf``
drops the low-rank component entirely, which reduces the problem to
columnwise lasso regressions of each variable on the others
(neighborhood selection).

Support of the conditional-independence graph is read off the off-diagonal
support of the returned S.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from . import matio
from .exceptions import ContractError, DimensionError, RankDeficiencyError
from .linalg import (
    as_matrix,
    l1_offdiag,
    min_norm_solution,
    nuclear_norm,
    numeric_rank,
    svd,
    svt,
    TOL,
)


@dataclass(frozen=True)
class RegLrConfig:
    """Penalties and stopping rules for ``fit_regression``.

    ``mu = math.inf`` selects the pure-sparse baseline (no low-rank term).
    """

    lam: float
    mu: float
    outer_max: int = 500
    outer_rel_tol: float = 1e-6
    cd_max_passes: int = 100
    cd_tol: float = 1e-8

    def __post_init__(self):
        if self.lam < 0:
            raise ContractError("lam must be nonnegative")
        if not (self.mu >= 0):
            raise ContractError("mu must be nonnegative or inf")
        if self.outer_max < 1 or self.cd_max_passes < 1:
            raise ContractError("iteration limits must be positive")
        if self.outer_rel_tol <= 0 or self.cd_tol <= 0:
            raise ContractError("tolerances must be positive")


@dataclass(frozen=True)
class FitResult:
    s_hat: np.ndarray
    l_hat: np.ndarray
    objective_trace: tuple
    iterations: int
    converged: bool
    rank_xl: int
    warnings: tuple = field(default_factory=tuple)


def lambda_max(x):
    """Smallest penalty at which the off-diagonal of S stays zero (L = 0)."""
    x = as_matrix(x, "sample")
    gram = x.T @ x
    off = np.abs(gram - np.diag(np.diag(gram)))
    return float(off.max()) if off.size else 0.0


def objective(x, s, l, lam, mu):
    """Exact objective value; with ``mu = inf`` the low-rank term must be 0."""
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    l = np.asarray(l, dtype=float)
    p = x.shape[1]
    if s.shape != (p, p) or l.shape != (p, p):
        raise DimensionError(
            f"S and L must be {p}x{p}, got {s.shape} and {l.shape}"
        )
    resid = x - x @ (s + l)
    fit = 0.5 * float(np.sum(resid * resid))
    if math.isinf(mu):
        if np.any(l != 0.0):
            raise ContractError("mu = inf requires L = 0")
        nuclear = 0.0
    else:
        nuclear = mu * nuclear_norm(x @ l)
    return fit + lam * l1_offdiag(s) + nuclear


@njit(cache=True)
def _cd_sweeps(gram, q, s, lam, tol, max_passes):  # pragma: no cover - jitted
    """Cyclic coordinate descent on the off-diagonal of ``s``, in place.

    ``q`` carries X'X(I - S - L) and is kept consistent incrementally.
    Returns (sweeps run, last max coordinate change).
    """
    p = gram.shape[0]
    sweeps = 0
    max_change = 0.0
    for _ in range(max_passes):
        sweeps += 1
        max_change = 0.0
        for j in range(p):
            for i in range(p):
                if i == j:
                    continue
                gii = gram[i, i]
                if gii == 0.0:
                    continue
                old = s[i, j]
                corr = q[i, j] + old * gii
                shrunk = abs(corr) - lam
                if shrunk > 0.0:
                    new = shrunk / gii if corr > 0.0 else -shrunk / gii
                else:
                    new = 0.0
                delta = new - old
                if delta != 0.0:
                    s[i, j] = new
                    for k in range(p):
                        q[k, j] -= delta * gram[k, i]
                    if abs(delta) > max_change:
                        max_change = abs(delta)
        if max_change < tol:
            break
    return sweeps, max_change


def _lasso_on_gram(gram, s, l, lam, cd_tol, cd_max_passes):
    s = s.copy()
    q = gram - gram @ (s + l)
    _cd_sweeps(gram, q, s, lam, cd_tol, cd_max_passes)
    return s


def lasso_block_step(x, s, l, lam, cd_tol=1e-8, cd_max_passes=100):
    """One lasso block: exact cyclic coordinate descent on off-diagonal S.

    Each coordinate update is the closed-form minimizer of the objective in
    that entry; the diagonal of S and all of L are left untouched.  Columns
    of X with zero norm keep their coordinates fixed.
    """
    x = as_matrix(x, "sample")
    s = as_matrix(s, "S")
    l = as_matrix(l, "L")
    return _lasso_on_gram(x.T @ x, s, l, lam, cd_tol, cd_max_passes)


def lowrank_block_step(x, s, mu):
    """Exact partial minimization in L at fixed S (diagonal constraint relaxed).

    Writing M = XL, the subproblem min 0.5*||X(I-S) - M||_F^2 + mu*||M||_*
    over matrices with columns in col(X) is solved by singular value
    thresholding of X(I-S), whose column space already lies in col(X);
    L is then the minimum-norm preimage.  Returns ``(L, M)``.
    """
    x = as_matrix(x, "sample")
    s = as_matrix(s, "S")
    m = svt(x - x @ s, mu)
    return min_norm_solution(x, m), m


def diagonal_block_step(s, l):
    """Restore diag(S + L) = 0 by setting diag(S) = -diag(L)."""
    s = as_matrix(s, "S").copy()
    np.fill_diagonal(s, -np.diag(np.asarray(l)))
    return s


def fit_regression(x, cfg):
    """Alternating block descent from S = L = 0.

    Cycles lasso -> low-rank -> diagonal restoration until the relative
    objective change over a full cycle drops below ``cfg.outer_rel_tol``
    or ``cfg.outer_max`` cycles have run; with ``mu = inf`` the low-rank
    and diagonal blocks are skipped and L stays identically zero.  The
    objective is recorded after every full cycle.
    """
    x = as_matrix(x, "sample")
    n, p = x.shape
    if n < 2 or p < 2:
        raise ContractError(f"need n >= 2 and p >= 2, got {n}x{p}")
    finite_mu = math.isfinite(cfg.mu)
    gram = x.T @ x
    notes = []
    if finite_mu:
        xsvd = svd(x)
        if xsvd.s[0] == 0.0 or xsvd.s[-1] <= TOL.full_rank_rel * xsvd.s[0]:
            raise RankDeficiencyError(
                "X must have full rank min(n, p) for finite mu"
            )
        if n < p:
            notes.append(
                "n < p: L is the minimum-norm representative; XL and S "
                "are still well defined"
            )
        pinv_x = xsvd.vt.T / xsvd.s  # times (u' m) below
    s = np.zeros((p, p))
    l = np.zeros((p, p))
    trace = []
    converged = False
    for _ in range(cfg.outer_max):
        s = _lasso_on_gram(gram, s, l, cfg.lam, cfg.cd_tol, cfg.cd_max_passes)
        if finite_mu:
            m = svt(x - x @ s, cfg.mu)
            l = pinv_x @ (xsvd.u.T @ m)
            s = diagonal_block_step(s, l)
        trace.append(objective(x, s, l, cfg.lam, cfg.mu))
        if len(trace) >= 2:
            prev = trace[-2]
            if abs(trace[-1] - prev) < cfg.outer_rel_tol * max(1.0, abs(prev)):
                converged = True
                break
    rank_xl = numeric_rank(x @ l) if finite_mu else 0
    return FitResult(
        s_hat=s,
        l_hat=l,
        objective_trace=tuple(trace),
        iterations=len(trace),
        converged=converged,
        rank_xl=rank_xl,
        warnings=tuple(notes),
    )


def regression_coefficients(precision):
    """Self-regression coefficients implied by a precision matrix.

    Returns ``(coef, diag_scale)`` where column j of ``coef`` holds the
    least-squares coefficients for predicting variable j from all others
    (zero diagonal), and ``diag_scale`` is the vector with entries
    -1/precision[j, j], so that coef = precision @ diag(diag_scale) + I.
    """
    k = as_matrix(precision, "precision")
    if k.shape[0] != k.shape[1]:
        raise DimensionError(f"square matrix required, got shape {k.shape}")
    d = np.diag(k)
    if np.any(d <= 0.0):
        raise ContractError("precision matrix has a nonpositive diagonal entry")
    diag_scale = -1.0 / d
    coef = k * diag_scale[np.newaxis, :] + np.eye(k.shape[0])
    return coef, diag_scale


def regression_decomposition(sparse_part, lowrank_part, precision):
    """Push a sparse + low-rank precision split through the coefficient map.

    With coef = precision @ diag(diag_scale) + I, the split
    coef = sparse_coef + lowrank_coef with sparse_coef = S*diag(scale) + I
    and lowrank_coef = L*diag(scale) preserves the rank of the low-rank
    part and creates no off-diagonal fill-in in the sparse part.
    """
    s_star = as_matrix(sparse_part, "sparse_part")
    l_star = as_matrix(lowrank_part, "lowrank_part")
    k = as_matrix(precision, "precision")
    if linf_mismatch(s_star + l_star, k) > 1e-10:
        raise ContractError("precision does not equal sparse_part + lowrank_part")
    _, diag_scale = regression_coefficients(k)
    sparse_coef = s_star * diag_scale[np.newaxis, :] + np.eye(k.shape[0])
    lowrank_coef = l_star * diag_scale[np.newaxis, :]
    return sparse_coef, lowrank_coef


def linf_mismatch(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b))
    return float(d.max()) if d.size else 0.0


def save_fit_result(result, cfg, out_dir, estimator="regression"):
    """Write S_hat.csv, L_hat.csv, trace.csv and a key=value meta file."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matio.write_matrix(out / "S_hat.csv", result.s_hat)
    matio.write_matrix(out / "L_hat.csv", result.l_hat)
    lines = ["cycle,objective"]
    lines += [
        f"{i},{matio.format_float(v)}"
        for i, v in enumerate(result.objective_trace, start=1)
    ]
    (out / "trace.csv").write_text("\n".join(lines) + "\n")
    meta = [
        ("estimator", estimator),
        ("lambda", matio.format_float(cfg.lam)),
        ("mu", matio.format_float(cfg.mu)),
        ("outer_max", cfg.outer_max),
        ("outer_rel_tol", matio.format_float(cfg.outer_rel_tol)),
        ("cd_max_passes", cfg.cd_max_passes),
        ("cd_tol", matio.format_float(cfg.cd_tol)),
        ("iterations", result.iterations),
        ("converged", result.converged),
        ("rank_xl", result.rank_xl),
    ]
    matio.write_keyvalues(out / "meta.txt", meta)
