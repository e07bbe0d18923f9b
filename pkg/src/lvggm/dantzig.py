"""Dantzig-type sparse + low-rank estimator.

Solves

    min  |S|_1 + mu * ||L||_*   subject to   |Sigma(S + L) - I|_inf <= lam

(the l1 norm here includes the diagonal of S) with a primal-dual hybrid
gradient method on the saddle form  min f(S, L) + g(A(S, L))  where
f(S, L) = |S|_1 + mu*||L||_*, the linear map is A(S, L) = Sigma(S + L)
and g is the indicator of the entrywise box around the identity.  The
conjugate g*(Y) = <I, Y> + lam*|Y|_1 has the proximal map

    prox_{sigma g*}(V) = soft_threshold(V - sigma*I, sigma*lam),

and the primal proxes are an entrywise soft-threshold for S and singular
value thresholding for L.  The returned point always carries a KKT
certificate (feasibility, stationarity of both blocks, complementary
slackness).
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import matio
from .exceptions import ContractError, DimensionError
from .linalg import (
    as_matrix,
    l1_entrywise,
    linf_entrywise,
    nuclear_norm,
    soft_threshold,
    spectral_norm,
    svt,
)

_KKT_CHECK_EVERY = 25
_OBJECTIVE_SAMPLE_EVERY = 100


@dataclass(frozen=True)
class DantzigConfig:
    lam: float
    mu: float
    max_iters: int = 20000
    kkt_tol: float = 1e-5
    step_safety: float = 0.99

    def __post_init__(self):
        if self.lam <= 0 or self.mu <= 0:
            raise ContractError("lam and mu must be positive")
        if not np.isfinite(self.mu):
            raise ContractError("mu must be finite for the Dantzig program")
        if self.max_iters < 1:
            raise ContractError("max_iters must be positive")
        if self.kkt_tol <= 0:
            raise ContractError("kkt_tol must be positive")
        if not 0.0 < self.step_safety < 1.0:
            raise ContractError("step_safety must lie in (0, 1)")


@dataclass(frozen=True)
class DantzigResult:
    s_hat: np.ndarray
    l_hat: np.ndarray
    y: np.ndarray
    primal_objective: float
    feasibility_violation: float
    kkt_residual: float
    iterations: int
    converged: bool
    objective_samples: tuple


def objective(s, l, mu):
    """Full l1 norm of S (diagonal included) plus mu times nuclear norm of L."""
    return l1_entrywise(s) + mu * nuclear_norm(l)


def feasibility_violation(sigma_hat, s, l, lam):
    p = sigma_hat.shape[0]
    gap = linf_entrywise(sigma_hat @ (s + l) - np.eye(p)) - lam
    return max(0.0, float(gap))


def kkt_residual(sigma_hat, s, l, y, lam, mu):
    """Distance of (S, L, Y) from the first-order optimality system.

    Maximum of: constraint violation; distance of -Sigma*Y from the
    subdifferential of |.|_1 at S; distance of -Sigma*Y/mu from the
    subdifferential of ||.||_* at L (spectral bound plus alignment of the
    trace inner product with the nuclear norm); and the complementary
    slackness defect |<Y, Sigma(S+L) - I> - lam*|Y|_1|.
    """
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    s = np.asarray(s, dtype=float)
    l = np.asarray(l, dtype=float)
    y = np.asarray(y, dtype=float)
    p = sigma_hat.shape[0]
    residual = feasibility_violation(sigma_hat, s, l, lam)

    grad = -(sigma_hat @ y)
    nz = s != 0.0
    r_s = float(np.max(np.maximum(np.abs(grad) - 1.0, 0.0))) if grad.size else 0.0
    if np.any(nz):
        r_s = max(r_s, float(np.max(np.abs(grad[nz] - np.sign(s[nz])))))
    residual = max(residual, r_s)

    gl = grad / mu
    r_l = max(0.0, spectral_norm(gl) - 1.0)
    nuc_l = nuclear_norm(l)
    align = abs(float(np.sum(gl * l)) - nuc_l) / max(1.0, nuc_l)
    residual = max(residual, r_l, align)

    slack = float(np.sum(y * (sigma_hat @ (s + l) - np.eye(p))))
    residual = max(residual, abs(slack - lam * l1_entrywise(y)))
    return residual


def fit_dantzig(sigma_hat, cfg):
    """Primal-dual hybrid gradient iteration from (S, L, Y) = 0.

    Steps are tau = sigma = step_safety / ||A|| with
    ||A|| = sqrt(2) * ||Sigma||_2, the standard over-relaxation (factor 2
    extrapolation) is applied to the primal pair, and the iteration stops
    once the KKT residual drops below ``cfg.kkt_tol`` or after
    ``cfg.max_iters`` iterations.
    """
    sigma_hat = as_matrix(sigma_hat, "covariance")
    if sigma_hat.shape[0] != sigma_hat.shape[1]:
        raise DimensionError(
            f"square matrix required, got shape {sigma_hat.shape}"
        )
    sigma_hat = 0.5 * (sigma_hat + sigma_hat.T)
    p = sigma_hat.shape[0]
    op_norm = np.sqrt(2.0) * spectral_norm(sigma_hat)
    if op_norm == 0.0:
        raise ContractError("degenerate input: covariance matrix is zero")
    tau = cfg.step_safety / op_norm
    eye = np.eye(p)

    s = np.zeros((p, p))
    l = np.zeros((p, p))
    s_bar = s
    l_bar = l
    y = np.zeros((p, p))
    samples = []
    iterations = 0
    converged = False
    resid = kkt_residual(sigma_hat, s, l, y, cfg.lam, cfg.mu)
    if resid <= cfg.kkt_tol:
        converged = True
    while not converged and iterations < cfg.max_iters:
        iterations += 1
        y = soft_threshold(
            y + tau * (sigma_hat @ (s_bar + l_bar)) - tau * eye, tau * cfg.lam
        )
        back = tau * (sigma_hat @ y)
        s_new = soft_threshold(s - back, tau)
        l_new = svt(l - back, tau * cfg.mu)
        s_bar = 2.0 * s_new - s
        l_bar = 2.0 * l_new - l
        s, l = s_new, l_new
        if iterations % _OBJECTIVE_SAMPLE_EVERY == 0:
            samples.append(objective(s, l, cfg.mu))
        if iterations % _KKT_CHECK_EVERY == 0 or iterations == cfg.max_iters:
            resid = kkt_residual(sigma_hat, s, l, y, cfg.lam, cfg.mu)
            if resid <= cfg.kkt_tol:
                converged = True
    return DantzigResult(
        s_hat=s,
        l_hat=l,
        y=y,
        primal_objective=objective(s, l, cfg.mu),
        feasibility_violation=feasibility_violation(sigma_hat, s, l, cfg.lam),
        kkt_residual=resid,
        iterations=iterations,
        converged=converged,
        objective_samples=tuple(samples),
    )


def save_dantzig_result(result, cfg, out_dir):
    """Fit-directory layout matching the regression estimator, plus Y.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matio.write_matrix(out / "S_hat.csv", result.s_hat)
    matio.write_matrix(out / "L_hat.csv", result.l_hat)
    matio.write_matrix(out / "Y.csv", result.y)
    lines = ["iteration,objective"]
    lines += [
        f"{(i + 1) * _OBJECTIVE_SAMPLE_EVERY},{matio.format_float(v)}"
        for i, v in enumerate(result.objective_samples)
    ]
    (out / "trace.csv").write_text("\n".join(lines) + "\n")
    meta = [
        ("estimator", "dantzig"),
        ("lambda", matio.format_float(cfg.lam)),
        ("mu", matio.format_float(cfg.mu)),
        ("max_iters", cfg.max_iters),
        ("kkt_tol", matio.format_float(cfg.kkt_tol)),
        ("step_safety", matio.format_float(cfg.step_safety)),
        ("iterations", result.iterations),
        ("converged", result.converged),
        ("primal_objective", matio.format_float(result.primal_objective)),
        ("feasibility_violation", matio.format_float(result.feasibility_violation)),
        ("kkt_residual", matio.format_float(result.kkt_residual)),
    ]
    matio.write_keyvalues(out / "meta.txt", meta)
