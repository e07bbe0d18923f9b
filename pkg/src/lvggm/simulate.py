"""Latent Gaussian graphical model simulator.

Builds a sparse full precision matrix over observed plus hidden variables,
derives the sparse-plus-low-rank ground truth for the observed block by
Schur complement, and draws zero-mean Gaussian samples.  Everything is a
pure function of (config, seed); see ``seeding`` for the generator.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from . import matio, seeding
from .exceptions import (
    ContractError,
    FactorizationError,
    InfeasibleHidingError,
    NumericError,
)
from .linalg import as_matrix, solve_spd


@dataclass(frozen=True)
class GeneratorConfig:
    """Random-model parameters.

    Off-diagonal support is Erdos-Renyi with ``edge_probability`` per pair;
    edge weights have magnitude uniform in [weight_low, weight_high] and
    random sign; the diagonal is the row-wise absolute off-diagonal sum
    plus ``diag_boost``, which makes the matrix strictly diagonally
    dominant and hence positive definite.
    """

    p_full: int = 30
    h: int = 3
    edge_probability: float = 0.06
    weight_low: float = 0.2
    weight_high: float = 0.5
    diag_boost: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.p_full < 1:
            raise ContractError("p_full must be positive")
        if not 0 <= self.h < self.p_full:
            raise ContractError("h must satisfy 0 <= h < p_full")
        if not 0.0 < self.edge_probability < 1.0:
            raise ContractError("edge_probability must lie in (0, 1)")
        if not 0.0 < self.weight_low <= self.weight_high:
            raise ContractError("need 0 < weight_low <= weight_high")
        if self.diag_boost <= 0.0:
            raise ContractError("diag_boost must be positive")


@dataclass(frozen=True)
class GroundTruth:
    """Full model plus the derived observed-block decomposition."""

    full_precision: np.ndarray
    observed_idx: tuple
    hidden_idx: tuple
    sparse_part: np.ndarray
    lowrank_part: np.ndarray
    true_edges: frozenset = field(default_factory=frozenset)

    @property
    def p(self):
        return len(self.observed_idx)

    @property
    def h(self):
        return len(self.hidden_idx)


def generate_full_precision(cfg):
    """Random sparse symmetric positive definite precision matrix.

    ``cfg.seed`` keys the structure stream; hiding and sampling use their
    own stage-derived streams (see ``seeding``).
    """
    rng = seeding.generator(seeding.mix(cfg.seed, seeding.STAGE_STRUCTURE))
    p = cfg.p_full
    k = np.zeros((p, p))
    iu, ju = np.triu_indices(p, 1)
    npairs = iu.size
    present = rng.random(npairs) < cfg.edge_probability
    magnitudes = rng.uniform(cfg.weight_low, cfg.weight_high, size=npairs)
    signs = np.where(rng.random(npairs) < 0.5, -1.0, 1.0)
    weights = np.where(present, signs * magnitudes, 0.0)
    k[iu, ju] = weights
    k[ju, iu] = weights
    np.fill_diagonal(k, np.abs(k).sum(axis=1) + cfg.diag_boost)
    return k


def connected_vertices(k):
    """Indices with at least one nonzero off-diagonal entry."""
    k = as_matrix(k, "precision")
    off = k - np.diag(np.diag(k))
    return [int(i) for i in np.flatnonzero(np.abs(off).sum(axis=1) > 0.0)]


def select_hidden(k_full, h, seed):
    """Pick ``h`` hidden variables uniformly among the connected vertices.

    Returns ``(observed_idx, hidden_idx)``; the observed indices keep their
    original order.
    """
    k_full = as_matrix(k_full, "precision")
    p_full = k_full.shape[0]
    if h == 0:
        return list(range(p_full)), []
    connected = connected_vertices(k_full)
    if len(connected) < h:
        raise InfeasibleHidingError(
            f"cannot hide {h} variables: only {len(connected)} are connected"
        )
    rng = seeding.generator(seed)
    chosen = rng.permutation(len(connected))[:h]
    hidden = sorted(connected[i] for i in chosen)
    observed = [i for i in range(p_full) if i not in set(hidden)]
    return observed, hidden


def marginal_decomposition(k_full, observed_idx, hidden_idx):
    """Split the observed-marginal precision into sparse + low-rank parts.

    The precision of the observed marginal is the Schur complement
    K_OO - K_OH K_HH^{-1} K_HO; the first term is the sparse part, the
    second (negated) is the low-rank part, symmetric negative
    semidefinite with rank at most ``len(hidden_idx)``.
    """
    k_full = as_matrix(k_full, "precision")
    obs = np.asarray(observed_idx, dtype=int)
    hid = np.asarray(hidden_idx, dtype=int)
    sparse_part = k_full[np.ix_(obs, obs)].copy()
    if hid.size == 0:
        return sparse_part, np.zeros_like(sparse_part)
    k_oh = k_full[np.ix_(obs, hid)]
    k_hh = k_full[np.ix_(hid, hid)]
    lowrank_part = -(k_oh @ solve_spd(k_hh, k_oh.T))
    lowrank_part = 0.5 * (lowrank_part + lowrank_part.T)
    return sparse_part, lowrank_part


def make_ground_truth(cfg):
    """Generate a full model, hide ``cfg.h`` connected variables, decompose.

    Stage seeds are derived from ``cfg.seed`` so structure, hiding and any
    later sampling are independent streams.
    """
    k_full = generate_full_precision(cfg)
    observed, hidden = select_hidden(
        k_full, cfg.h, seeding.mix(cfg.seed, seeding.STAGE_HIDING)
    )
    sparse_part, lowrank_part = marginal_decomposition(k_full, observed, hidden)
    edges = true_edge_set(sparse_part)
    return GroundTruth(
        full_precision=k_full,
        observed_idx=tuple(observed),
        hidden_idx=tuple(hidden),
        sparse_part=sparse_part,
        lowrank_part=lowrank_part,
        true_edges=edges,
    )


def true_edge_set(sparse_part):
    """Unordered index pairs where the off-diagonal entries are nonzero."""
    s = as_matrix(sparse_part, "sparse_part")
    i, j = np.nonzero(np.triu(s, 1))
    return frozenset(zip(i.tolist(), j.tolist()))


def observed_covariance(ground_truth):
    """Covariance of the observed marginal: inverse of sparse + low-rank."""
    k_obs = ground_truth.sparse_part + ground_truth.lowrank_part
    return solve_spd(k_obs, np.eye(k_obs.shape[0]))


def sample_gaussian(sigma, n, seed):
    """Draw ``n`` independent rows from N(0, sigma) via Cholesky."""
    sigma = as_matrix(sigma, "covariance")
    if n < 1:
        raise ContractError("sample size must be positive")
    chol = solve_spd_cholesky(sigma)
    z = seeding.generator(seed).standard_normal((n, sigma.shape[0]))
    return z @ chol.T


def solve_spd_cholesky(a):
    """Lower Cholesky factor, with the package's SPD error reporting."""
    a = as_matrix(a, "matrix")
    c, info = scipy.linalg.lapack.dpotrf(0.5 * (a + a.T), lower=1)
    if info > 0:
        raise FactorizationError(
            f"matrix is not positive definite (pivot {info})", pivot=int(info)
        )
    if info < 0:
        raise NumericError(f"dpotrf: illegal argument {-info}")
    return np.tril(c)


def empirical_covariance(x):
    """Second-moment matrix X'X / n; the mean is known to be zero."""
    x = as_matrix(x, "sample")
    return (x.T @ x) / x.shape[0]


def save_ground_truth(truth, cfg, out_dir, write_manifest=True):
    """Serialize to a directory; the manifest records config and seed.

    Callers that fold the generator settings into a larger run manifest
    (the CLI does) pass ``write_manifest=False`` so each directory keeps
    exactly one manifest.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matio.write_matrix(out / "full_precision.csv", truth.full_precision)
    matio.write_index_list(out / "observed_idx.txt", truth.observed_idx)
    matio.write_index_list(out / "hidden_idx.txt", truth.hidden_idx)
    matio.write_matrix(out / "S_star.csv", truth.sparse_part)
    matio.write_matrix(out / "L_star.csv", truth.lowrank_part)
    if write_manifest:
        matio.write_keyvalues(out / "manifest.txt", generator_config_items(cfg))


def generator_config_items(cfg):
    return [
        ("p_full", cfg.p_full),
        ("h", cfg.h),
        ("edge_probability", matio.format_float(cfg.edge_probability)),
        ("weight_low", matio.format_float(cfg.weight_low)),
        ("weight_high", matio.format_float(cfg.weight_high)),
        ("diag_boost", matio.format_float(cfg.diag_boost)),
        ("seed", cfg.seed),
    ]


def load_ground_truth(in_dir):
    src = Path(in_dir)
    k_full = matio.read_matrix(src / "full_precision.csv")
    observed = matio.read_index_list(src / "observed_idx.txt")
    hidden = matio.read_index_list(src / "hidden_idx.txt")
    sparse_part = matio.read_matrix(src / "S_star.csv")
    lowrank_part = matio.read_matrix(src / "L_star.csv")
    return GroundTruth(
        full_precision=k_full,
        observed_idx=tuple(observed),
        hidden_idx=tuple(hidden),
        sparse_part=sparse_part,
        lowrank_part=lowrank_part,
        true_edges=true_edge_set(sparse_part),
    )
