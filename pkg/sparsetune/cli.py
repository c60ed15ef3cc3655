"""Command-line entry point: python -m sparsetune.cli <subcommand> ...

Artifacts go to stdout (or --out); logs go to stderr. Exit codes: 0 on
success, 1 on a computational failure (error JSON on stderr), 2 on a usage
error.
"""

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional, Sequence

import numpy as np

from sparsetune.artifacts import build_artifact, dumps, load_json_file, save_json_file
from sparsetune.core.dataset import Dataset, load_dataset, load_signal
from sparsetune.core.diagnostics import compute_kstar, diagnose
from sparsetune.errors import ConfigurationError, DataError, SparseTuneError
from sparsetune.estimators.group import group_lasso_fit, group_lasso_path
from sparsetune.estimators.lasso import lasso_fit, lasso_path
from sparsetune.estimators.refit import gauss_lasso_path, gauss_lasso_refit
from sparsetune.estimators.results import EstimatorPath, GroupStructure
from sparsetune.estimators.scaled import (
    default_sqrt_lambda,
    penalized_loglik_fit,
    sqrt_lasso_direct,
    sqrt_lasso_fit,
)
from sparsetune.logger import error, info
from sparsetune.penalties.cache import PENALTY_CACHE
from sparsetune.penalties.solver import linselect_penalty
from sparsetune.segmentation.select import (
    segment_select_bgh,
    segment_select_lebarbier,
    segment_select_slope,
    tv_linselect_select,
)
from sparsetune.selection.criteria import modified_bic_select, plugin_penalty_select
from sparsetune.selection.crossval import (
    gauss_lasso_path_factory,
    holdout_select,
    lasso_path_factory,
    vfold_cv_select,
)
from sparsetune.selection.exhaustive import (
    bgh_select_exhaustive,
    bm_select_exhaustive,
    lb_aggregate_exhaustive,
)
from sparsetune.selection.linselect import (
    build_collection_coordinate,
    build_collection_group,
    linselect_select,
    linselect_select_full,
)
from sparsetune.selection.slope import lebarbier_shape, linear_shape, slope_heuristic_select
from sparsetune.settings import (
    LINSELECT_PEN_MULTIPLIER,
    PATH_GRID_RATIO,
    PATH_GRID_SIZE,
    PENALTY_CACHE_FILE,
    SIM_WORKERS,
    resolved_config,
)
from sparsetune.simulation.experiments import (
    BIC_DEMO,
    BIC_DEMO_FULL_N,
    BIC_DEMO_N,
    BIC_DEMO_REPS,
    EXPERIMENT_1,
    EXPERIMENTS,
    ExperimentOptions,
    run_bic_demo,
    run_experiment1,
    run_experiment2,
)
from sparsetune.simulation.instances import SimConfig, magnitude_grid

USAGE_ERROR = "usage_error"
EXIT_FAILURE = 1
EXIT_USAGE = 2

SEGMENT_METHODS = ("bgh", "lebarbier", "slope", "tv+linselect")
SIMULATION_KEYS = {"settings", "magnitudes", "options", "n", "reps", "sigma"}


class ArtifactParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors are machine-readable."""

    def error(self, message: str) -> NoReturn:
        print(json.dumps({"error": USAGE_ERROR, "message": message}), file=sys.stderr)
        self.exit(EXIT_USAGE)


def _add_data_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="CSV design (rows are observations).")
    response = parser.add_mutually_exclusive_group(required=True)
    response.add_argument("--response-col", help="Response column of --data (index or header name).")
    response.add_argument("--response", help="Separate single-column response CSV.")
    parser.add_argument("--header", action="store_true", help="CSV files start with a header row.")


def _add_grid_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid-size", type=int, default=PATH_GRID_SIZE)
    parser.add_argument("--grid-ratio", type=float, default=PATH_GRID_RATIO)


def _add_path_file_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--path-file", help="Saved fit-lasso --path artifact; a Lasso path is fitted when omitted."
    )


def _add_groups_args(parser: argparse.ArgumentParser, required: bool) -> None:
    groups = parser.add_mutually_exclusive_group(required=required)
    groups.add_argument("--groups", help="Comma-separated group label of every column.")
    groups.add_argument("--group-size", type=int, help="Consecutive groups of this size.")


def _add_out_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="Write the JSON artifact here instead of stdout.")


def _load_data(args: argparse.Namespace) -> Dataset:
    return load_dataset(
        Path(args.data),
        response_col=args.response_col,
        response_path=Path(args.response) if args.response else None,
        header=args.header,
    )


def _load_path(args: argparse.Namespace, data: Dataset) -> EstimatorPath:
    if not args.path_file:
        return lasso_path(data, size=args.grid_size, ratio=args.grid_ratio)
    payload = load_json_file(Path(args.path_file))
    if not isinstance(payload, dict):
        raise DataError(f"Cannot read a path artifact from {args.path_file}")
    path = EstimatorPath.from_dict(payload.get("result", payload))
    if path.fits and path.fits[0].beta.size != data.p:
        raise ConfigurationError(
            f"Path coefficients have length {path.fits[0].beta.size}, data has p={data.p}"
        )
    return path


def _groups(args: argparse.Namespace, p: int) -> Optional[GroupStructure]:
    if args.groups:
        return GroupStructure.from_labels([label.strip() for label in args.groups.split(",")])
    if args.group_size:
        return GroupStructure.from_size(p, args.group_size)
    return None


def _parse_indices(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise DataError(f"Expected comma-separated integers, got {text!r}") from e


def _arguments(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k != "handler"}


def _emit(args: argparse.Namespace, result: Any) -> None:
    artifact = build_artifact(
        args.command, {"settings": resolved_config(), "arguments": _arguments(args)}, result
    )
    if args.out:
        if save_json_file(Path(args.out), artifact) is None:
            raise DataError(f"Failed to write {args.out}")
    else:
        print(dumps(artifact))


def cmd_fit_lasso(args: argparse.Namespace) -> None:
    data = _load_data(args)
    if args.path:
        _emit(args, lasso_path(data, size=args.grid_size, ratio=args.grid_ratio))
    else:
        _emit(args, lasso_fit(data, args.lam))


def cmd_fit_sqrt_lasso(args: argparse.Namespace) -> None:
    data = _load_data(args)
    scale = None
    if args.normalize:
        data, scale = data.normalized()
    lam = default_sqrt_lambda(data.p) if args.lam is None else args.lam
    solvers = {
        "alternation": sqrt_lasso_fit,
        "direct": sqrt_lasso_direct,
        "loglik": penalized_loglik_fit,
    }
    fit = solvers[args.method](data, lam)
    _emit(args, fit if scale is None else fit.in_original_scale(scale))


def cmd_fit_group_lasso(args: argparse.Namespace) -> None:
    data = _load_data(args)
    groups = _groups(args, data.p)
    if args.path:
        _emit(args, group_lasso_path(data, groups, size=args.grid_size, ratio=args.grid_ratio))
        return
    if args.lam is None:
        raise ConfigurationError("fit-group-lasso needs --lambda or --path")
    weights = np.sqrt(groups.sizes.astype(float))
    _emit(args, group_lasso_fit(data, groups, args.lam * weights))


def cmd_refit_gauss(args: argparse.Namespace) -> None:
    data = _load_data(args)
    if args.support is not None:
        _emit(args, gauss_lasso_refit(data, _parse_indices(args.support)))
    else:
        _emit(args, gauss_lasso_path(_load_path(args, data), data))


def cmd_select_linselect(args: argparse.Namespace) -> None:
    data = _load_data(args)
    groups = _groups(args, data.p)
    if groups is not None and not args.path_file:
        path = group_lasso_path(data, groups, size=args.grid_size, ratio=args.grid_ratio)
    else:
        path = _load_path(args, data)
    if args.full:
        report = linselect_select_full(path, data, args.multiplier)
    elif groups is not None:
        collection = build_collection_group(path, groups, data, args.multiplier)
        report = linselect_select(path, collection, data, args.multiplier, method="linselect-group")
    else:
        collection = build_collection_coordinate(path, data, args.multiplier)
        report = linselect_select(path, collection, data, args.multiplier)
    _emit(args, report)


def cmd_select_cv(args: argparse.Namespace) -> None:
    data = _load_data(args)
    if args.gauss:
        factory = gauss_lasso_path_factory(args.grid_size, args.grid_ratio)
    else:
        factory = lasso_path_factory(args.grid_size, args.grid_ratio)
    if args.holdout is not None:
        report = holdout_select(factory, data, split_ratio=args.holdout, seed=args.seed)
    else:
        report = vfold_cv_select(
            factory, data, V=args.folds, seed=args.seed, max_workers=args.workers
        )
    _emit(args, report)


def cmd_select_bic(args: argparse.Namespace) -> None:
    data = _load_data(args)
    path = _load_path(args, data)
    if args.plugin:
        _emit(args, plugin_penalty_select(path, data, args.plugin))
    else:
        _emit(args, modified_bic_select(path, data))


def _read_rss_table(path: Path) -> Dict[int, float]:
    """CSV rows (dim, rss); a non-numeric first row is taken as a header."""
    table: Dict[int, float] = {}
    try:
        with open(path, "r", encoding="utf8", newline="") as f:
            for i, row in enumerate(csv.reader(f)):
                if not row:
                    continue
                try:
                    dim, rss = int(row[0]), float(row[1])
                except (ValueError, IndexError) as e:
                    if i == 0:
                        continue
                    raise DataError(f"{path}: bad row {i + 1}: {row}") from e
                table[dim] = rss
    except FileNotFoundError as e:
        raise DataError(f"CSV file not found: {path}") from e
    return table


def cmd_select_slope(args: argparse.Namespace) -> None:
    table = _read_rss_table(Path(args.rss))
    if args.shape == "lebarbier":
        if args.n is None:
            raise ConfigurationError("The lebarbier shape needs --n")
        shape = lebarbier_shape(args.n)
    else:
        shape = linear_shape
    _emit(args, slope_heuristic_select(table, shape))


def cmd_bench_oracle(args: argparse.Namespace) -> None:
    data = _load_data(args)
    if args.method == "bgh":
        _emit(args, bgh_select_exhaustive(data, max_size=args.max_size))
        return
    if args.sigma2 is None:
        raise ConfigurationError(f"bench-oracle --method {args.method} needs --sigma2")
    if args.method == "bm":
        _emit(args, bm_select_exhaustive(data, args.sigma2))
    else:
        _emit(args, lb_aggregate_exhaustive(data, args.sigma2))


def cmd_segment(args: argparse.Namespace) -> None:
    y = load_signal(Path(args.signal), header=args.header)
    if args.method == "bgh":
        result = segment_select_bgh(y, args.q_max)
    elif args.method == "lebarbier":
        result = segment_select_lebarbier(y, args.q_max, args.sigma2)
    elif args.method == "slope":
        result = segment_select_slope(y, args.q_max)
    else:
        result = tv_linselect_select(y, size=args.grid_size, ratio=args.grid_ratio)
    _emit(args, result)


def _simulation_payload(args: argparse.Namespace) -> Dict[str, Any]:
    if not args.config:
        return {}
    payload = load_json_file(Path(args.config))
    if not isinstance(payload, dict):
        raise ConfigurationError(f"{args.config} must contain a JSON object")
    unknown = set(payload) - SIMULATION_KEYS
    if unknown:
        raise ConfigurationError(f"Unknown simulation config keys: {sorted(unknown)}")
    return payload


def _simulation_settings(payload: Dict[str, Any], seed: int) -> List[SimConfig]:
    raw = payload.get("settings", [{"n": 100, "p": 100}])
    entries = [raw] if isinstance(raw, dict) else list(raw)
    settings = [SimConfig.from_dict({**entry, "seed": seed}) for entry in entries]
    if "magnitudes" in payload:
        settings = [c for base in settings for c in magnitude_grid(base, payload["magnitudes"])]
    return settings


def cmd_simulate(args: argparse.Namespace) -> None:
    payload = _simulation_payload(args)
    workers = args.workers
    if args.experiment == BIC_DEMO:
        n = BIC_DEMO_FULL_N if args.full_scale else int(payload.get("n", BIC_DEMO_N))
        report = run_bic_demo(
            n=n,
            reps=int(payload.get("reps", BIC_DEMO_REPS)),
            seed=args.seed,
            sigma=float(payload.get("sigma", 1.0)),
            max_workers=workers,
        )
    else:
        settings = _simulation_settings(payload, args.seed)
        options = ExperimentOptions.from_dict(payload.get("options", {}))
        run = run_experiment1 if args.experiment == EXPERIMENT_1 else run_experiment2
        report = run(settings, options, max_workers=workers)
    if args.csv:
        report.to_csv(Path(args.csv))
    _emit(args, report)


def cmd_pen(args: argparse.Namespace) -> None:
    """CSV rows n,D,Delta,pen_delta,pen for every (D, Delta) pair."""
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["n", "D", "Delta", "pen_delta", "pen"])
    for D in args.d:
        for delta in args.delta:
            spec = linselect_penalty(args.n, D, delta, args.multiplier)
            writer.writerow([args.n, D, repr(float(delta)), repr(spec.pen_delta), repr(spec.pen)])


def cmd_kstar(args: argparse.Namespace) -> None:
    print(compute_kstar(args.n, args.p))


def cmd_diagnose(args: argparse.Namespace) -> None:
    data = _load_data(args)
    T = _parse_indices(args.support) if args.support else None
    groups = _groups(args, data.p)
    _emit(
        args,
        diagnose(
            data,
            k_max=args.k_max,
            xi=args.xi,
            T=T,
            groups=groups.blocks() if groups is not None else None,
            s=args.group_sparsity,
            sparsity=args.sparsity,
        ),
    )


def build_parser() -> ArtifactParser:
    parser = ArtifactParser(
        prog="sparsetune", description="Variance-free tuning of sparse linear regression."
    )
    parser.add_argument(
        "--penalty-cache",
        action="store_true",
        help=f"Load and save solved penalties in {PENALTY_CACHE_FILE}.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArtifactParser)

    p = sub.add_parser("fit-lasso", help="Lasso at one lambda or along a grid.")
    _add_data_args(p)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--lambda", dest="lam", type=float)
    mode.add_argument("--path", action="store_true", help="Fit the default decreasing grid.")
    _add_grid_args(p)
    _add_out_arg(p)
    p.set_defaults(handler=cmd_fit_lasso)

    p = sub.add_parser("fit-sqrt-lasso", help="Square-root Lasso (default lambda 2 sqrt(2 log p)).")
    _add_data_args(p)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--method", choices=("alternation", "direct", "loglik"), default="alternation")
    p.add_argument("--normalize", action="store_true", help="Fit on unit-norm columns and map back.")
    _add_out_arg(p)
    p.set_defaults(handler=cmd_fit_sqrt_lasso)

    p = sub.add_parser("fit-group-lasso", help="Group Lasso with lam_k = lambda sqrt(|G_k|).")
    _add_data_args(p)
    _add_groups_args(p, required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--path", action="store_true")
    _add_grid_args(p)
    _add_out_arg(p)
    p.set_defaults(handler=cmd_fit_group_lasso)

    p = sub.add_parser("refit-gauss", help="Least-squares refit on a support or along a path.")
    _add_data_args(p)
    p.add_argument("--support", help="Comma-separated column indices.")
    _add_path_file_arg(p)
    _add_grid_args(p)
    _add_out_arg(p)
    p.set_defaults(handler=cmd_refit_gauss)

    p = sub.add_parser("select-linselect", help="LinSelect over a Lasso or group Lasso path.")
    _add_data_args(p)
    _add_path_file_arg(p)
    _add_groups_args(p, required=False)
    p.add_argument("--full", action="store_true", help="Full collection of small supports (p <= 12).")
    p.add_argument("--multiplier", type=float, default=LINSELECT_PEN_MULTIPLIER)
    _add_grid_args(p)
    _add_out_arg(p)
    p.set_defaults(handler=cmd_select_linselect)

    p = sub.add_parser("select-cv", help="V-fold or hold-out cross-validation.")
    _add_data_args(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--holdout", type=float, help="Single split with this test fraction.")
    p.add_argument("--gauss", action="store_true", help="Cross-validate the Gauss-Lasso path.")
    p.add_argument("--workers", type=int, default=1)
    _add_grid_args(p)
    _add_out_arg(p)
    p.set_defaults(handler=cmd_select_cv)

    p = sub.add_parser("select-bic", help="Modified BIC, or a plug-in variance penalty.")
    _add_data_args(p)
    _add_path_file_arg(p)
    p.add_argument("--plugin", choices=("AIC", "BIC", "BirgeMassart"))
    _add_grid_args(p)
    _add_out_arg(p)
    p.set_defaults(handler=cmd_select_bic)

    p = sub.add_parser("select-slope", help="Slope heuristic on a (dim, rss) table.")
    p.add_argument("--rss", required=True, help="CSV with rows dim,rss.")
    p.add_argument("--shape", choices=("linear", "lebarbier"), default="linear")
    p.add_argument("--n", type=int, help="Signal length for the lebarbier shape.")
    _add_out_arg(p)
    p.set_defaults(handler=cmd_select_slope)

    p = sub.add_parser("bench-oracle", help="Exhaustive benchmarks over all supports (p <= 12).")
    _add_data_args(p)
    p.add_argument("--method", choices=("bm", "lb", "bgh"), required=True)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--max-size", type=int)
    _add_out_arg(p)
    p.set_defaults(handler=cmd_bench_oracle)

    p = sub.add_parser("segment", help="Changepoint segmentation of a single-column signal.")
    p.add_argument("--signal", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--method", choices=SEGMENT_METHODS, default="bgh")
    p.add_argument("--q-max", type=int)
    p.add_argument("--sigma2", type=float, help="Known variance for the lebarbier method.")
    _add_grid_args(p)
    _add_out_arg(p)
    p.set_defaults(handler=cmd_segment)

    p = sub.add_parser("simulate", help="Run a seeded Monte-Carlo experiment.")
    p.add_argument("--experiment", choices=EXPERIMENTS, required=True)
    p.add_argument("--config", help="JSON with settings, magnitudes and options.")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=SIM_WORKERS)
    p.add_argument("--full-scale", action="store_true", help=f"bic-demo at n = {BIC_DEMO_FULL_N}.")
    p.add_argument("--csv", help="Also write the raw samples as CSV.")
    _add_out_arg(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("pen", help="Print solved LinSelect penalties as CSV.")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, nargs="+", required=True)
    p.add_argument("--delta", type=float, nargs="+", required=True)
    p.add_argument("--multiplier", type=float, default=LINSELECT_PEN_MULTIPLIER)
    p.set_defaults(handler=cmd_pen)

    p = sub.add_parser("kstar", help="Print the largest sparsity k with 2k log(p/k) <= n.")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.set_defaults(handler=cmd_kstar)

    p = sub.add_parser("diagnose", help="Sparse eigenvalues, compatibility and regime of a design.")
    _add_data_args(p)
    p.add_argument("--k-max", type=int, default=3)
    p.add_argument("--xi", type=float, default=4.0)
    p.add_argument("--support", help="Comma-separated support T for the compatibility constant.")
    p.add_argument("--sparsity", type=int)
    _add_groups_args(p, required=False)
    p.add_argument("--group-sparsity", type=int, default=1, help="Largest number of active groups.")
    _add_out_arg(p)
    p.set_defaults(handler=cmd_diagnose)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.penalty_cache:
        PENALTY_CACHE.cache_path = PENALTY_CACHE_FILE
        PENALTY_CACHE.load()
    try:
        args.handler(args)
    except SparseTuneError as e:
        error(f"{args.command} failed: {e}")
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return EXIT_FAILURE
    finally:
        if args.penalty_cache:
            PENALTY_CACHE.save()
    info(f"{args.command} finished")
    return 0


if __name__ == "__main__":
    sys.exit(main())
