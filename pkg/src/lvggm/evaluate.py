"""Support-recovery benchmarking: power, FDR, rank curves over a tuning grid.

A run draws ``replicates`` independent models, hides connected variables,
samples data, fits the chosen estimator at every (lam, mu) grid cell and
scores the recovered edge set against the true one.  Grid values can be
absolute or relative: in relative mode each replicate rescales lam by its
own lambda_max(X) and mu by the spectral norm of X, while the recorded
grid value stays the shared relative one so cells aggregate across
replicates.

Everything is a pure function of the configuration: per-replicate seeds
are derived from the master seed, so results are identical no matter how
many worker processes are used.  Record timings are therefore reported
out of band (see ``run_experiment``) and the ``seconds`` field of the
canonical records is fixed at 0.0.
"""

import math
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import dantzig as dantzig_mod
from . import matio
from . import regression as regression_mod
from . import seeding, simulate
from .exceptions import (
    ContractError,
    InfeasibleHidingError,
    UndefinedPowerError,
)
from .linalg import TOL, numeric_rank, spectral_norm
from .simulate import GeneratorConfig

LAMBDA_MODES = ("absolute", "lambda_max")
MU_MODES = ("absolute", "spectral")
ESTIMATORS = ("regression", "dantzig")

FDR_BIN_WIDTH = 0.05
FDR_BIN_COUNT = 10
RANK_MATCH_TOL = 0.5


@dataclass(frozen=True)
class SupportEstimate:
    edges: frozenset
    threshold: float
    rule: str


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorConfig
    n: int
    lambdas: tuple
    mus: tuple
    replicates: int
    estimator: str = "regression"
    master_seed: int = 0
    lambda_mode: str = "lambda_max"
    mu_mode: str = "spectral"

    def __post_init__(self):
        if self.n < 1:
            raise ContractError("n must be positive")
        if self.replicates < 1:
            raise ContractError("replicates must be positive")
        if self.estimator not in ESTIMATORS:
            raise ContractError(f"unknown estimator {self.estimator!r}")
        if self.lambda_mode not in LAMBDA_MODES:
            raise ContractError(f"unknown lambda_mode {self.lambda_mode!r}")
        if self.mu_mode not in MU_MODES:
            raise ContractError(f"unknown mu_mode {self.mu_mode!r}")
        if not self.lambdas or not self.mus:
            raise ContractError("tuning grids must be non-empty")
        if any(not (v > 0) or math.isinf(v) for v in self.lambdas):
            raise ContractError("lambda grid values must be positive and finite")
        if list(self.lambdas) != sorted(self.lambdas):
            raise ContractError("lambda grid must be sorted ascending")
        if any(not (v > 0) for v in self.mus):
            raise ContractError("mu grid values must be positive")
        if list(self.mus) != sorted(self.mus):
            raise ContractError("mu grid must be sorted ascending")
        if self.estimator == "dantzig" and any(math.isinf(v) for v in self.mus):
            raise ContractError("mu = inf is only defined for the regression estimator")


@dataclass(frozen=True)
class ExperimentRecord:
    replicate: int
    lam: float
    mu: float
    power: float
    fdr: float
    rank_xl: int
    seconds: float
    converged: bool


@dataclass(frozen=True)
class CellAggregate:
    lam: float
    mu: float
    mean_power: float
    mean_fdr: float
    mean_rank_xl: float
    count: int


@dataclass(frozen=True)
class ComparisonRow:
    fdr_low: float
    fdr_high: float
    power_rank_matched: float  # None when the bin is empty for this arm
    power_baseline: float
    difference: float


def default_lambda_grid():
    """20 log-spaced fractions of lambda_max, from 0.01 to 1."""
    return tuple(np.logspace(-2.0, 0.0, 20).tolist())


def default_mu_grid(include_inf=True):
    """5 log-spaced fractions of the spectral norm of X, plus optionally inf."""
    grid = np.logspace(math.log10(0.05), 0.0, 5).tolist()
    if include_inf:
        grid.append(math.inf)
    return tuple(grid)


def default_experiment_config(estimator="regression", replicates=100, master_seed=0,
                              generator=None, n=30):
    """Paper-scale defaults: 30 variables, 3 hidden, n = 30, 20 x 6 grid."""
    generator = generator if generator is not None else GeneratorConfig()
    if estimator == "regression":
        return ExperimentConfig(
            generator=generator,
            n=n,
            lambdas=default_lambda_grid(),
            mus=default_mu_grid(include_inf=True),
            replicates=replicates,
            estimator="regression",
            master_seed=master_seed,
            lambda_mode="lambda_max",
            mu_mode="spectral",
        )
    return ExperimentConfig(
        generator=generator,
        n=n,
        lambdas=tuple(np.logspace(math.log10(0.05), math.log10(0.95), 20).tolist()),
        mus=tuple(np.logspace(-1.0, 1.0, 5).tolist()),
        replicates=replicates,
        estimator="dantzig",
        master_seed=master_seed,
        lambda_mode="absolute",
        mu_mode="absolute",
    )


def support_offdiag(s_hat, threshold=TOL.support_threshold, rule="or"):
    """Edge set read off the off-diagonal entries exceeding ``threshold``.

    ``rule='or'`` includes pair (i, j) when either of S[i, j], S[j, i] is
    above threshold in magnitude; ``'and'`` requires both.
    """
    if rule not in ("or", "and"):
        raise ContractError(f"rule must be 'or' or 'and', got {rule!r}")
    if threshold < 0:
        raise ContractError("threshold must be nonnegative")
    s = np.asarray(s_hat, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ContractError(f"square matrix required, got shape {s.shape}")
    big = np.abs(s) > threshold
    upper = big | big.T if rule == "or" else big & big.T
    i, j = np.nonzero(np.triu(upper, 1))
    return SupportEstimate(
        edges=frozenset(zip(i.tolist(), j.tolist())),
        threshold=float(threshold),
        rule=rule,
    )


def power_fdr(estimate, truth):
    """Recall over true edges and false discovery proportion of the estimate.

    An empty estimate has FDR 0 by convention; an empty truth set leaves
    power undefined and raises.
    """
    truth = frozenset(tuple(sorted(e)) for e in truth)
    if not truth:
        raise UndefinedPowerError("power undefined: true edge set is empty")
    edges = frozenset(tuple(sorted(e)) for e in estimate.edges)
    power = len(edges & truth) / len(truth)
    fdr = len(edges - truth) / len(edges) if edges else 0.0
    return float(power), float(fdr)


def _fit_cell(x, sigma_hat, estimator, lam_eff, mu_eff):
    """Fit one grid cell; returns (s_hat, rank_xl, converged)."""
    if estimator == "regression":
        cfg = regression_mod.RegLrConfig(lam=lam_eff, mu=mu_eff)
        fit = regression_mod.fit_regression(x, cfg)
        return fit.s_hat, fit.rank_xl, fit.converged
    cfg = dantzig_mod.DantzigConfig(lam=lam_eff, mu=mu_eff)
    fit = dantzig_mod.fit_dantzig(sigma_hat, cfg)
    return fit.s_hat, numeric_rank(x @ fit.l_hat), fit.converged


def run_replicate(cfg, r):
    """All records for replicate ``r``; [] with a notice when infeasible.

    Returns ``(records, timings, notice)`` where timings maps
    (replicate, lam, mu) to measured seconds and notice is None or a
    human-readable skip reason.
    """
    seed_r = seeding.mix(cfg.master_seed, r)
    gen_cfg = replace(cfg.generator, seed=seed_r)
    try:
        truth = simulate.make_ground_truth(gen_cfg)
    except InfeasibleHidingError as exc:
        return [], {}, f"replicate {r} skipped: {exc}"
    if not truth.true_edges:
        return [], {}, f"replicate {r} skipped: no true edges among observed variables"
    sigma_obs = simulate.observed_covariance(truth)
    x = simulate.sample_gaussian(
        sigma_obs, cfg.n, seeding.mix(seed_r, seeding.STAGE_SAMPLING)
    )
    sigma_hat = simulate.empirical_covariance(x)
    lam_scale = (
        regression_mod.lambda_max(x) if cfg.lambda_mode == "lambda_max" else 1.0
    )
    mu_scale = spectral_norm(x) if cfg.mu_mode == "spectral" else 1.0
    records = []
    timings = {}
    for mu in cfg.mus:
        for lam in cfg.lambdas:
            t0 = time.perf_counter()
            s_hat, rank_xl, converged = _fit_cell(
                x, sigma_hat, cfg.estimator, lam * lam_scale, mu * mu_scale
            )
            elapsed = time.perf_counter() - t0
            est = support_offdiag(s_hat)
            power, fdr = power_fdr(est, truth.true_edges)
            records.append(
                ExperimentRecord(
                    replicate=r,
                    lam=float(lam),
                    mu=float(mu),
                    power=power,
                    fdr=fdr,
                    rank_xl=int(rank_xl),
                    seconds=0.0,
                    converged=bool(converged),
                )
            )
            timings[(r, float(lam), float(mu))] = elapsed
    return records, timings, None


def _replicate_worker(args):
    return run_replicate(*args)


def run_experiment(cfg, jobs=1, timings=None, notices=None):
    """Records for every (replicate, lam, mu) cell, sorted deterministically.

    The returned records are a pure function of ``cfg``; measured per-cell
    wall times go into the optional ``timings`` dict (and skip notices into
    ``notices``) because they are not reproducible.
    """
    tasks = [(cfg, r) for r in range(cfg.replicates)]
    if jobs > 1 and cfg.replicates > 1:
        import multiprocessing

        with multiprocessing.Pool(processes=jobs) as pool:
            results = pool.map(_replicate_worker, tasks)
    else:
        results = [run_replicate(c, r) for (c, r) in tasks]
    records = []
    for recs, times, notice in results:
        records.extend(recs)
        if timings is not None:
            timings.update(times)
        if notice is not None and notices is not None:
            notices.append(notice)
    records.sort(key=lambda rec: (rec.replicate, rec.lam, rec.mu))
    return records


def aggregate(records):
    """Per-(lam, mu) means of power, FDR and rank, with replicate counts."""
    if not records:
        raise ContractError("no records to aggregate")
    groups = {}
    for rec in records:
        groups.setdefault((rec.lam, rec.mu), []).append(rec)
    out = []
    for (lam, mu) in sorted(groups):
        cell = groups[(lam, mu)]
        out.append(
            CellAggregate(
                lam=lam,
                mu=mu,
                mean_power=float(np.mean([r.power for r in cell])),
                mean_fdr=float(np.mean([r.fdr for r in cell])),
                mean_rank_xl=float(np.mean([r.rank_xl for r in cell])),
                count=len(cell),
            )
        )
    return out


def select_rank_matched(aggregates, h, tol=RANK_MATCH_TOL):
    """Cells whose mean rank lies within ``tol`` of the hidden dimension."""
    if not aggregates:
        raise ContractError("no aggregates given")
    if tol <= 0:
        raise ContractError("tol must be positive")
    return [
        agg for agg in aggregates if h - tol <= agg.mean_rank_xl <= h + tol
    ]


def curve_comparison(aggregates, h, rank_tol=RANK_MATCH_TOL):
    """Best power per FDR bin: rank-matched finite-mu cells vs mu = inf.

    Bins are [0, 0.05), ..., [0.45, 0.5] (the last bin is closed).  A bin
    with no cells in an arm gets None for that arm and for the difference.
    """
    baseline = [a for a in aggregates if math.isinf(a.mu)]
    if not baseline:
        raise ContractError("aggregates contain no mu = inf cells")
    matched = [
        a for a in select_rank_matched(aggregates, h, rank_tol)
        if not math.isinf(a.mu)
    ]
    rows = []
    for b in range(FDR_BIN_COUNT):
        low = b * FDR_BIN_WIDTH
        high = (b + 1) * FDR_BIN_WIDTH
        last = b == FDR_BIN_COUNT - 1

        def in_bin(a):
            return low <= a.mean_fdr < high or (last and a.mean_fdr == high)

        finite_pows = [a.mean_power for a in matched if in_bin(a)]
        base_pows = [a.mean_power for a in baseline if in_bin(a)]
        pm = max(finite_pows) if finite_pows else None
        pb = max(base_pows) if base_pows else None
        diff = pm - pb if (pm is not None and pb is not None) else None
        rows.append(
            ComparisonRow(
                fdr_low=low,
                fdr_high=high,
                power_rank_matched=pm,
                power_baseline=pb,
                difference=diff,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# CSV formats.  mu = inf is spelled 'inf'; missing comparison cells stay
# empty.  Floats use shortest round-trip formatting so identical runs give
# identical bytes.

RECORDS_HEADER = "replicate,lambda,mu,power,fdr,rank_xl,seconds,converged"
AGGREGATES_HEADER = "lambda,mu,mean_power,mean_fdr,mean_rank_xl,count"
COMPARISON_HEADER = (
    "fdr_low,fdr_high,power_rank_matched,power_baseline,difference"
)


def _fmt(v):
    return matio.format_float(v)


def write_records_csv(path, records):
    lines = [RECORDS_HEADER]
    for r in records:
        lines.append(
            f"{r.replicate},{_fmt(r.lam)},{_fmt(r.mu)},{_fmt(r.power)},"
            f"{_fmt(r.fdr)},{r.rank_xl},{_fmt(r.seconds)},"
            f"{'true' if r.converged else 'false'}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_records_csv(path):
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != RECORDS_HEADER:
        raise ContractError(f"{path}: expected header {RECORDS_HEADER!r}")
    records = []
    for line in lines[1:]:
        if not line.strip():
            continue
        rep, lam, mu, power, fdr, rank_xl, seconds, converged = line.split(",")
        records.append(
            ExperimentRecord(
                replicate=int(rep),
                lam=float(lam),
                mu=float(mu),
                power=float(power),
                fdr=float(fdr),
                rank_xl=int(rank_xl),
                seconds=float(seconds),
                converged=converged == "true",
            )
        )
    return records


def write_timings_csv(path, timings):
    lines = ["replicate,lambda,mu,seconds"]
    for (rep, lam, mu) in sorted(timings):
        lines.append(f"{rep},{_fmt(lam)},{_fmt(mu)},{_fmt(timings[(rep, lam, mu)])}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_aggregates_csv(path, aggregates):
    lines = [AGGREGATES_HEADER]
    for a in aggregates:
        lines.append(
            f"{_fmt(a.lam)},{_fmt(a.mu)},{_fmt(a.mean_power)},"
            f"{_fmt(a.mean_fdr)},{_fmt(a.mean_rank_xl)},{a.count}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_aggregates_csv(path):
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != AGGREGATES_HEADER:
        raise ContractError(f"{path}: expected header {AGGREGATES_HEADER!r}")
    out = []
    for line in lines[1:]:
        if not line.strip():
            continue
        lam, mu, mean_power, mean_fdr, mean_rank, count = line.split(",")
        out.append(
            CellAggregate(
                lam=float(lam),
                mu=float(mu),
                mean_power=float(mean_power),
                mean_fdr=float(mean_fdr),
                mean_rank_xl=float(mean_rank),
                count=int(count),
            )
        )
    return out


def write_comparison_csv(path, rows):
    lines = [COMPARISON_HEADER]
    for r in rows:
        pm = "" if r.power_rank_matched is None else _fmt(r.power_rank_matched)
        pb = "" if r.power_baseline is None else _fmt(r.power_baseline)
        diff = "" if r.difference is None else _fmt(r.difference)
        lines.append(f"{_fmt(r.fdr_low)},{_fmt(r.fdr_high)},{pm},{pb},{diff}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_comparison_csv(path):
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != COMPARISON_HEADER:
        raise ContractError(f"{path}: expected header {COMPARISON_HEADER!r}")
    rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        low, high, pm, pb, diff = line.split(",")
        rows.append(
            ComparisonRow(
                fdr_low=float(low),
                fdr_high=float(high),
                power_rank_matched=float(pm) if pm else None,
                power_baseline=float(pb) if pb else None,
                difference=float(diff) if diff else None,
            )
        )
    return rows
