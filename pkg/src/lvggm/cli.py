"""Command-line surface: simulate, fit, experiment, plot.

Exit codes: 0 success, 2 infeasible hiding, 64 flag or configuration
errors, 65 unreadable or dimensionally inconsistent input data, 70 solver
contract failures.  Nothing is written to the output directory before all
flags and configuration have parsed.  Every output directory receives one
``manifest.txt`` whose key=value lines echo the full configuration; an
experiment manifest can be passed back through ``--config`` to reproduce
``records.csv`` byte for byte (bookkeeping keys are ignored on read).
"""

import argparse
import math
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, evaluate, matio, seeding, simulate, svgplot
from . import dantzig as dantzig_mod
from . import regression as regression_mod
from .exceptions import (
    ContractError,
    DimensionError,
    FactorizationError,
    InfeasibleHidingError,
    NumericError,
    RankDeficiencyError,
    UndefinedPowerError,
)
from .linalg import numeric_rank

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_SOLVER = 70

_DATA_ERRORS = (ContractError, DimensionError, OSError)
_SOLVER_ERRORS = (RankDeficiencyError, FactorizationError, NumericError)

# manifest bookkeeping keys ignored when a manifest is reused as a config
RESERVED_KEYS = {"command", "version", "started", "finished"}

_CONFIG_KEYS = {
    "p_full",
    "h",
    "n",
    "edge_probability",
    "weight_low",
    "weight_high",
    "diag_boost",
    "replicates",
    "estimator",
    "master_seed",
    "lambda_mode",
    "mu_mode",
    "lambdas",
    "mus",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_manifest(out_dir, command, started, finished, config_items):
    items = [
        ("command", command),
        ("version", __version__),
        ("started", started),
        ("finished", finished),
    ]
    items.extend(config_items)
    matio.write_keyvalues(Path(out_dir) / "manifest.txt", items)


def _generator_items(gen, extra=()):
    items = list(simulate.generator_config_items(gen))
    items.extend(extra)
    return items


def experiment_config_items(cfg):
    return [
        ("p_full", cfg.generator.p_full),
        ("h", cfg.generator.h),
        ("edge_probability", matio.format_float(cfg.generator.edge_probability)),
        ("weight_low", matio.format_float(cfg.generator.weight_low)),
        ("weight_high", matio.format_float(cfg.generator.weight_high)),
        ("diag_boost", matio.format_float(cfg.generator.diag_boost)),
        ("n", cfg.n),
        ("replicates", cfg.replicates),
        ("estimator", cfg.estimator),
        ("master_seed", cfg.master_seed),
        ("lambda_mode", cfg.lambda_mode),
        ("mu_mode", cfg.mu_mode),
        ("lambdas", ",".join(matio.format_float(v) for v in cfg.lambdas)),
        ("mus", ",".join(matio.format_float(v) for v in cfg.mus)),
    ]


def parse_experiment_config(values):
    """Build an ExperimentConfig from a key=value dict (strings).

    Missing keys fall back to the paper-scale defaults; unknown keys other
    than manifest bookkeeping are rejected.
    """
    unknown = set(values) - _CONFIG_KEYS - RESERVED_KEYS
    if unknown:
        raise ContractError(f"unknown configuration keys: {sorted(unknown)}")

    def get(key, cast, default):
        if key not in values:
            return default
        try:
            return cast(values[key])
        except ValueError as exc:
            raise ContractError(f"bad value for {key}: {values[key]!r}") from exc

    gen = simulate.GeneratorConfig(
        p_full=get("p_full", int, 30),
        h=get("h", int, 3),
        edge_probability=get("edge_probability", float, 0.06),
        weight_low=get("weight_low", float, 0.2),
        weight_high=get("weight_high", float, 0.5),
        diag_boost=get("diag_boost", float, 0.5),
        seed=0,
    )
    estimator = get("estimator", str, "regression")
    cfg = evaluate.default_experiment_config(
        estimator=estimator,
        replicates=get("replicates", int, 100),
        master_seed=get("master_seed", int, 0),
        generator=gen,
        n=get("n", int, 30),
    )
    updates = {}
    if "lambdas" in values:
        updates["lambdas"] = tuple(
            get("lambdas", lambda s: [float(v) for v in s.split(",")], None)
        )
    if "mus" in values:
        updates["mus"] = tuple(
            get("mus", lambda s: [float(v) for v in s.split(",")], None)
        )
    if "lambda_mode" in values:
        updates["lambda_mode"] = values["lambda_mode"]
    if "mu_mode" in values:
        updates["mu_mode"] = values["mu_mode"]
    return replace(cfg, **updates) if updates else cfg


def build_parser():
    parser = _Parser(prog="lvggm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="generate a model and a sample")
    sim.add_argument("--p-full", type=int, default=30)
    sim.add_argument("--h", type=int, default=3)
    sim.add_argument("--n", type=int, default=30)
    sim.add_argument("--edge-prob", type=float, default=0.06)
    sim.add_argument("--weight-low", type=float, default=0.2)
    sim.add_argument("--weight-high", type=float, default=0.5)
    sim.add_argument("--diag-boost", type=float, default=0.5)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="fit one estimator at one (lambda, mu)")
    fit.add_argument("--estimator", choices=("regression", "dantzig"), required=True)
    fit.add_argument("--x", help="sample matrix CSV (regression)")
    fit.add_argument("--sigma", help="covariance matrix CSV (dantzig)")
    fit.add_argument("--lambda", dest="lam", type=float, required=True)
    fit.add_argument("--mu", required=True, help="number, or 'inf' for regression")
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=cmd_fit)

    exp = sub.add_parser("experiment", help="grid x replicate benchmark")
    exp.add_argument("--config", help="key=value configuration file")
    exp.add_argument("--p-full", type=int)
    exp.add_argument("--h", type=int)
    exp.add_argument("--n", type=int)
    exp.add_argument("--edge-prob", type=float)
    exp.add_argument("--replicates", type=int)
    exp.add_argument("--estimator", choices=("regression", "dantzig"))
    exp.add_argument("--seed", type=int)
    exp.add_argument("--lambdas", help="comma-separated grid values")
    exp.add_argument("--mus", help="comma-separated grid values; 'inf' allowed")
    exp.add_argument("--lambda-mode", choices=evaluate.LAMBDA_MODES)
    exp.add_argument("--mu-mode", choices=evaluate.MU_MODES)
    exp.add_argument("--jobs", type=int, default=1)
    exp.add_argument("--out", required=True)
    exp.set_defaults(func=cmd_experiment)

    plot = sub.add_parser("plot", help="emit the three SVG panels")
    plot.add_argument("--aggregates", required=True)
    plot.add_argument("--out", required=True)
    plot.add_argument("--h", type=int, required=True)
    plot.set_defaults(func=cmd_plot)
    return parser


def cmd_simulate(args):
    try:
        gen = simulate.GeneratorConfig(
            p_full=args.p_full,
            h=args.h,
            edge_probability=args.edge_prob,
            weight_low=args.weight_low,
            weight_high=args.weight_high,
            diag_boost=args.diag_boost,
            seed=args.seed,
        )
        if args.n < 1:
            raise ContractError("--n must be positive")
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    started = _now()
    try:
        truth = simulate.make_ground_truth(gen)
    except InfeasibleHidingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    sigma_obs = simulate.observed_covariance(truth)
    x = simulate.sample_gaussian(
        sigma_obs, args.n, seeding.mix(gen.seed, seeding.STAGE_SAMPLING)
    )
    sigma_hat = simulate.empirical_covariance(x)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    simulate.save_ground_truth(truth, gen, out, write_manifest=False)
    matio.write_matrix(out / "X.csv", x)
    matio.write_matrix(out / "Sigma_hat.csv", sigma_hat)
    _write_manifest(
        out, "simulate", started, _now(), _generator_items(gen, [("n", args.n)])
    )
    print(
        f"simulated p_full={gen.p_full} h={gen.h} n={args.n} "
        f"observed={truth.p} edges={len(truth.true_edges)}"
    )
    return EXIT_OK


def cmd_fit(args):
    try:
        mu = float(args.mu)
    except ValueError:
        print(f"error: bad --mu value {args.mu!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.estimator == "regression":
            if not args.x:
                raise UsageError("--x is required for --estimator regression")
            cfg = regression_mod.RegLrConfig(lam=args.lam, mu=mu)
        else:
            if not args.sigma:
                raise UsageError("--sigma is required for --estimator dantzig")
            cfg = dantzig_mod.DantzigConfig(lam=args.lam, mu=mu)
    except (UsageError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    started = _now()
    try:
        source = args.x if args.estimator == "regression" else args.sigma
        data = matio.read_matrix(source)
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    out = Path(args.out)
    try:
        if args.estimator == "regression":
            result = regression_mod.fit_regression(data, cfg)
            objective = result.objective_trace[-1]
            rank = result.rank_xl
            converged = result.converged
            out.mkdir(parents=True, exist_ok=True)
            regression_mod.save_fit_result(result, cfg, out)
        else:
            result = dantzig_mod.fit_dantzig(data, cfg)
            objective = result.primal_objective
            rank = numeric_rank(result.l_hat)
            converged = result.converged
            out.mkdir(parents=True, exist_ok=True)
            dantzig_mod.save_dantzig_result(result, cfg, out)
    except _SOLVER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ContractError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    config_items = [
        ("estimator", args.estimator),
        ("input", source),
        ("lambda", matio.format_float(args.lam)),
        ("mu", matio.format_float(mu)),
    ]
    _write_manifest(out, "fit", started, _now(), config_items)
    print(
        f"objective={matio.format_float(objective)} rank_xl={rank} "
        f"converged={'true' if converged else 'false'}"
    )
    return EXIT_OK


def cmd_experiment(args):
    inline_flags = [
        args.p_full, args.h, args.n, args.edge_prob, args.replicates,
        args.estimator, args.seed, args.lambdas, args.mus,
        args.lambda_mode, args.mu_mode,
    ]
    try:
        if args.jobs < 1:
            raise UsageError("--jobs must be positive")
        if args.config:
            if any(v is not None for v in inline_flags):
                raise UsageError("--config and inline flags are mutually exclusive")
            try:
                values = matio.read_keyvalues(args.config)
            except OSError as exc:
                raise UsageError(str(exc)) from None
            cfg = parse_experiment_config(values)
        else:
            values = {}
            if args.p_full is not None:
                values["p_full"] = str(args.p_full)
            if args.h is not None:
                values["h"] = str(args.h)
            if args.n is not None:
                values["n"] = str(args.n)
            if args.edge_prob is not None:
                values["edge_probability"] = repr(args.edge_prob)
            if args.replicates is not None:
                values["replicates"] = str(args.replicates)
            if args.estimator is not None:
                values["estimator"] = args.estimator
            if args.seed is not None:
                values["master_seed"] = str(args.seed)
            if args.lambdas is not None:
                values["lambdas"] = args.lambdas
            if args.mus is not None:
                values["mus"] = args.mus
            if args.lambda_mode is not None:
                values["lambda_mode"] = args.lambda_mode
            if args.mu_mode is not None:
                values["mu_mode"] = args.mu_mode
            cfg = parse_experiment_config(values)
    except (UsageError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    started = _now()
    timings = {}
    notices = []
    try:
        records = evaluate.run_experiment(
            cfg, jobs=args.jobs, timings=timings, notices=notices
        )
    except _SOLVER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for notice in notices:
        print(notice, file=sys.stderr)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    evaluate.write_records_csv(out / "records.csv", records)
    evaluate.write_timings_csv(out / "timings.csv", timings)
    aggregates = evaluate.aggregate(records) if records else []
    evaluate.write_aggregates_csv(out / "aggregates.csv", aggregates)
    if any(math.isinf(a.mu) for a in aggregates):
        rows = evaluate.curve_comparison(aggregates, cfg.generator.h)
    else:
        rows = []
    evaluate.write_comparison_csv(out / "comparison.csv", rows)
    _write_manifest(out, "experiment", started, _now(), experiment_config_items(cfg))
    print(
        f"experiment done: {len(records)} records, "
        f"{cfg.replicates - len(notices)}/{cfg.replicates} replicates, "
        f"{len(cfg.lambdas)}x{len(cfg.mus)} grid"
    )
    return EXIT_OK


def cmd_plot(args):
    started = _now()
    try:
        aggregates = evaluate.read_aggregates_csv(args.aggregates)
        if not aggregates:
            raise ContractError(f"{args.aggregates}: no aggregate rows")
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    svgplot.plot_rank_vs_lambda(aggregates, out / "rank_vs_lambda.svg")
    svgplot.plot_power_vs_fdr(aggregates, out / "power_vs_fdr.svg")
    svgplot.plot_rank_matched(aggregates, args.h, out / "rank_matched.svg")
    _write_manifest(
        out, "plot", started, _now(),
        [("aggregates", args.aggregates), ("h", args.h)],
    )
    print(f"wrote 3 panels to {out}")
    return EXIT_OK


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UndefinedPowerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
