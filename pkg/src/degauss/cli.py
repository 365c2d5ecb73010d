"""Command-line driver for the cooperative transport experiments.

Exit codes: 0 success, 2 configuration error, 3 contradictory evidence,
4 numerical failure.
"""
import argparse
import logging
import sys

import numpy as np
import yaml

from . import settings
from .errors import DegaussError, InferenceInconsistency, InvalidInputError
from .experiments import ExperimentConfig, compare_models, run_estimation, sweep_ridge
from .robotsim import METHODS, simulate, write_record
from .selftest import run_selftest

EXIT_OK, EXIT_CONFIG, EXIT_INCONSISTENT, EXIT_NUMERICAL = 0, 2, 3, 4

log = logging.getLogger("degauss")


def load_config(path):
    """Read a YAML or JSON mapping of configuration values."""
    if path is None:
        return {}
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InvalidInputError(f"{path}: expected a mapping at the top level")
    return data


def make_config(args):
    data = load_config(args.config)
    world = dict(data.pop("world", {}) or {})
    if args.seed is not None:
        world["seed"] = args.seed
    if getattr(args, "method", None):
        data["method"] = args.method
    if getattr(args, "ridge", None) is not None:
        data["ridge"] = args.ridge
    if getattr(args, "out_dir", None):
        data["out_dir"] = args.out_dir
    if getattr(args, "no_plots", False):
        data["plots"] = False
    if getattr(args, "seeds", None) is not None:
        first = world.get("seed", 0)
        data["seeds"] = list(range(first, first + args.seeds))
    if world:
        data["world"] = world
    return ExperimentConfig.from_mapping(data)


def cmd_simulate(args, config):
    record = simulate(config.world)
    write_record(record, config.out_dir)
    print(f"wrote {config.world.steps} steps for {config.world.robot_count} robots to {config.out_dir}")
    return EXIT_OK


def cmd_estimate(args, config):
    report = run_estimation(config)
    window = config.world.window
    print(f"method {config.method}: {report.sweeps} sweeps in {report.duration:.2f} s")
    if window is not None:
        print(f"mean window position trace {report.window_trace(window):.6g}")
    if np.isfinite(report.log_evidence):
        print(f"log evidence {report.log_evidence:.6f}")
    if config.method == "ridge":
        print(f"max condition number {report.max_condition:.6g}")
    return EXIT_OK


def cmd_sweep_ridge(args, config):
    result = sweep_ridge(config)
    print(f"{'lambda':>10} {'kappa':>12} {'logZ mean':>12} {'logZ std':>10} failures")
    for r in result["rows"]:
        print(f"{r['lam']:10.1e} {r['kappa']:12.4g} {r['logz_mean']:12.4f} {r['logz_std']:10.4f} {r['failures']}")
    ref = result["reference"]
    print(f"{'exact':>10} {'':>12} {np.nanmean(ref):12.4f} {np.nanstd(ref, ddof=1) if ref.size > 1 else 0.0:10.4f}")
    return EXIT_OK


def cmd_compare_models(args, config):
    grids = ("pickup", "size") if args.grid == "both" else (args.grid,)
    results = compare_models(config, grids=grids)
    for name, res in results.items():
        print(f"{name} hypotheses")
        for r in res["rows"]:
            mark = "*" if r["argmax"] else " "
            print(f" {mark} {r['value']:>6} {r['logz_mean']:12.4f} {r['logz_std']:10.4f} wins {r['wins']}/{len(config.seeds)}")
    return EXIT_OK


def cmd_selftest(args, config):
    results = run_selftest(seed=args.seed or 0, cases=args.cases, mutate=args.mutate)
    ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.cases} cases, worst error {r.worst:.3g}, {r.seconds:.2f} s")
        for line in r.failures[:5]:
            print(f"    {line}")
        ok &= r.passed
    return EXIT_OK if ok else EXIT_NUMERICAL


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "sweep-ridge": cmd_sweep_ridge,
    "compare-models": cmd_compare_models,
    "selftest": cmd_selftest,
}
NEEDS_EVIDENCE = ("sweep-ridge", "compare-models")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON file with configuration values")
    common.add_argument("--seed", type=int, help="random seed (first seed for sweeps)")
    common.add_argument("--out-dir", help="directory for CSV and SVG output")
    common.add_argument("--method", choices=METHODS, help="how the rigid-body rows are treated")
    common.add_argument("--ridge", type=float, help="diagonal loading for the ridge method")
    common.add_argument("--no-plots", action="store_true", help="do not write SVG files")
    common.add_argument("--moments-only", action="store_true", help="skip log-measure bookkeeping")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="degauss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="simulate a run and write its CSV files")
    sub.add_parser("estimate", parents=[common], help="estimate the trajectories and write beliefs.csv")
    p = sub.add_parser("sweep-ridge", parents=[common], help="log evidence and conditioning over ridge values")
    p.add_argument("--seeds", type=int, help="number of consecutive seeds")
    p = sub.add_parser("compare-models", parents=[common], help="log evidence of pickup-step and size hypotheses")
    p.add_argument("--seeds", type=int, help="number of consecutive seeds")
    p.add_argument("--grid", choices=("pickup", "size", "both"), default="both")
    p = sub.add_parser("selftest", parents=[common], help="run the built-in numerical checks")
    p.add_argument("--cases", type=int, help="cases per suite")
    p.add_argument("--mutate", action="store_true", help="flip output precisions to check the checks")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.moments_only and args.command in NEEDS_EVIDENCE:
        print(f"error: {args.command} needs log evidence, which --moments-only disables", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = make_config(args)
    except (InvalidInputError, OSError, yaml.YAMLError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with settings.skip_log_measure(args.moments_only):
            return COMMANDS[args.command](args, config)
    except InferenceInconsistency as exc:
        where = f" (cluster {exc.cluster})" if exc.cluster else ""
        print(f"inconsistent evidence{where}: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except InvalidInputError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegaussError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
