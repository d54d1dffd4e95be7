"""Command-line interface.

Exit codes: 0 independence not rejected, 10 rejected, 2 usage error,
3 data error, 4 internal error.
"""

import argparse
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import errors
from .analysis import METHODS, dependence_graph, lag_scan, ols_lag_fit, run_method
from .experiments import PAPER_SCALE, ExperimentSpec, emit_report, run_experiment
from .ingest import (
    GAP_POLICIES,
    difference,
    granulate,
    join_values,
    load_csv,
    load_pair_csv,
    load_values_csv,
    write_pair_csv,
)
from .kernels import MEDIAN_HEURISTIC, KernelSpec
from .nulldist import DEFAULT_RESAMPLES, PERMUTATION, SHIFT
from .synth import DEPENDENT, INDEPENDENT, ProcessConfig, simulate_pair

log = logging.getLogger("shifthsic")

EXIT_ACCEPT = 0
EXIT_REJECT = 10
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

USAGE_ERRORS = (errors.InvalidInput, errors.InvalidShift, errors.NonStationary, errors.SpecError, FileNotFoundError)
DATA_ERRORS = (
    errors.ParseError,
    errors.OrderError,
    errors.DegenerateSeries,
    errors.NoOverlap,
    errors.EmptyInput,
    errors.TooShort,
    errors.SingularDesign,
    errors.GeneratorStall,
)


class UsageError(Exception):
    pass


def _bandwidth(text):
    if text in ("median", MEDIAN_HEURISTIC):
        return MEDIAN_HEURISTIC
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bandwidth must be a positive number or 'median', got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _common_flags(top_level=False):
    # defaults live on the top-level parser only; subcommand copies stay
    # suppressed so they never overwrite a value given before the subcommand
    d = (lambda v: v) if top_level else (lambda v: argparse.SUPPRESS)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=d(0))
    common.add_argument("--threads", type=_positive_int, default=d(os.cpu_count() or 1))
    common.add_argument("--kernel", choices=["gaussian", "linear"], default=d("gaussian"))
    common.add_argument("--bandwidth", type=_bandwidth, default=d(MEDIAN_HEURISTIC))
    common.add_argument("--output", "-o", default=d(None), help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default=d(None))
    common.add_argument("--verbose", "-v", action="store_true", default=d(False))
    return common


def build_parser():
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="shifthsic", description=__doc__.splitlines()[0],
                                     parents=[_common_flags(top_level=True)])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", parents=[common], help="HSIC independence test of two series")
    p.add_argument("--x", help="timestamp_ms,value CSV")
    p.add_argument("--y", help="timestamp_ms,value CSV")
    p.add_argument("--paired", help="timestamp_ms,x,y CSV")
    p.add_argument("--method", choices=[SHIFT, PERMUTATION], default=SHIFT)
    p.add_argument("--shift-lo", type=int)
    p.add_argument("--shift-hi", type=int)
    p.add_argument("--resamples", type=int, default=DEFAULT_RESAMPLES)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", parents=[common], help="simulate an AR(1) pair with Extinct Gaussian innovations")
    p.add_argument("--design", choices=[DEPENDENT, INDEPENDENT], default=DEPENDENT)
    p.add_argument("--a", type=float, default=0.2)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--n", type=_positive_int, default=600)
    p.add_argument("--burn-in", type=int, default=1000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", parents=[common], help="run a TP/FP experiment from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--paper-scale", action="store_true", help="n=1200, 300 repetitions")
    p.add_argument("--gnuplot", help="also write a gnuplot-ready long-format file here")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("scan", parents=[common], help="lag regression plus residual dependence scan")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--max-reg-lag", type=int, default=6)
    p.add_argument("--max-scan-lag", type=int, default=30)
    p.add_argument("--method", nargs="+", choices=METHODS, default=[SHIFT, PERMUTATION])
    p.add_argument("--intercept", action="store_true")
    p.add_argument("--resamples", type=int, default=DEFAULT_RESAMPLES)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("graph", parents=[common], help="pairwise dependence graph over several tick files")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--granulate", type=_positive_int, default=120000, help="window in ms")
    p.add_argument("--difference", action="store_true")
    p.add_argument("--gap-policy", choices=GAP_POLICIES, default=GAP_POLICIES[0])
    p.add_argument("--method", choices=[SHIFT, PERMUTATION], default=SHIFT)
    p.add_argument("--shift-lo", type=int)
    p.add_argument("--shift-hi", type=int)
    p.add_argument("--resamples", type=int, default=DEFAULT_RESAMPLES)
    p.set_defaults(func=cmd_graph)
    return parser


def _kernel(args):
    return KernelSpec(args.kernel, args.bandwidth)


def _write(args, text, suffix=None):
    if args.output is None:
        sys.stdout.write(text)
        return
    path = Path(args.output)
    if suffix:
        path = path.with_suffix(suffix)
    path.write_text(text)
    log.info("wrote %s", path)


def _alpha(value):
    if not 0 < value < 1:
        raise UsageError(f"--alpha must lie in (0, 1), got {value}")
    return value


def cmd_test(args):
    alpha = _alpha(args.alpha)
    if args.paired and (args.x or args.y):
        raise UsageError("give either --paired or --x/--y, not both")
    if args.paired:
        pair = load_pair_csv(args.paired)
    elif args.x and args.y:
        pair = join_values(load_values_csv(args.x), load_values_csv(args.y), (Path(args.x).stem, Path(args.y).stem))
    else:
        raise UsageError("need --paired or both --x and --y")
    if args.method == PERMUTATION and args.resamples < 100:
        raise UsageError("--resamples must be >= 100")
    result = run_method(pair, args.method, _kernel(args), args.seed, args.resamples, (args.shift_lo, args.shift_hi))
    reject = result.p_value <= alpha
    out = result.to_dict()
    out.update(alpha=alpha, reject=bool(reject))
    if args.format == "csv":
        text = "statistic,p_value,n,method,alpha,reject\n"
        text += f"{result.statistic.value:.17g},{result.p_value:.17g},{result.n},{args.method},{alpha:.17g},{int(reject)}\n"
    else:
        text = json.dumps(out, indent=2) + "\n"
    _write(args, text)
    log.info("p-value %.6g (%s independence at alpha=%g)", result.p_value, "reject" if reject else "accept", alpha)
    return EXIT_REJECT if reject else EXIT_ACCEPT


def cmd_simulate(args):
    cfg = ProcessConfig(args.a, args.p, args.r, args.n, args.burn_in, args.seed, args.design)
    pair = simulate_pair(cfg)
    if args.format == "json":
        text = json.dumps({"config": cfg.to_dict(), "x": pair.x.tolist(), "y": pair.y.tolist()}) + "\n"
        _write(args, text)
    elif args.output is None:
        sys.stdout.write("timestamp_ms,x,y\n")
        for t, x, y in zip(pair.timestamps, pair.x, pair.y):
            sys.stdout.write(f"{t},{x:.17g},{y:.17g}\n")
    else:
        write_pair_csv(args.output, pair)
    return EXIT_ACCEPT


def cmd_experiment(args):
    text = Path(args.spec).read_text()
    spec = ExperimentSpec.from_json(text)
    if args.paper_scale:
        spec = ExperimentSpec(**dict(spec.to_dict(), **PAPER_SCALE))
    log.info("running %s: %d grid points x %d repetitions, n=%d", spec.design, len(spec.grid), spec.repetitions, spec.n)
    report = run_experiment(spec, parallelism=args.threads)
    _write(args, emit_report(report, format=args.format or "csv"))
    if args.gnuplot:
        emit_report(report, args.gnuplot, format="gnuplot")
    log.info("finished in %.1f s", report.timings["total_seconds"])
    if not report.complete:
        log.warning("partial report written")
        return EXIT_INTERNAL
    return EXIT_ACCEPT


def cmd_scan(args):
    pair = join_values(load_values_csv(args.x), load_values_csv(args.y), (Path(args.x).stem, Path(args.y).stem))
    if not 0 <= args.max_scan_lag < pair.n / 4:
        raise UsageError(f"--max-scan-lag must be below n/4 = {pair.n / 4:g}")
    if args.max_reg_lag < 0:
        raise UsageError("--max-reg-lag must be >= 0")
    if PERMUTATION in args.method and args.resamples < 100:
        raise UsageError("--resamples must be >= 100")
    fit = ols_lag_fit(pair, args.max_reg_lag, intercept=args.intercept)
    coef = ", ".join(f"a{j}={c:.6g}" for j, c in enumerate(fit.coefficients))
    log.info("lag regression: %s", coef)
    result = lag_scan(fit.residuals, pair.x, args.max_scan_lag, tuple(args.method), _kernel(args), args.seed,
                      args.resamples, coefficients=fit.coefficients)
    if args.format == "json":
        text = json.dumps({
            "coefficients": fit.coefficients.tolist(),
            "intercept": fit.intercept,
            "lags": result.lags.tolist(),
            "p_values": {m: v.tolist() for m, v in result.p_values.items()},
            "sample_sizes": result.sample_sizes.tolist(),
        }, indent=2) + "\n"
    else:
        buf = io.StringIO()
        result.to_csv(buf)
        text = buf.getvalue()
    _write(args, text)
    return EXIT_ACCEPT


def cmd_graph(args):
    _alpha(args.alpha)
    series = []
    for path in args.inputs:
        reg = granulate(load_csv(path), args.granulate, args.gap_policy)
        series.append(difference(reg) if args.difference else reg)
    hsic_graph, corr_graph = dependence_graph(series, args.method, args.alpha, _kernel(args), args.seed,
                                              args.resamples, (args.shift_lo, args.shift_hi))
    payload = json.dumps({"hsic": hsic_graph.to_dict(), "correlation": corr_graph.to_dict()}, indent=2) + "\n"
    dot = hsic_graph.to_dot() + corr_graph.to_dot()
    if args.output is not None:
        _write(args, dot, ".dot")
        _write(args, payload, ".json")
    else:
        sys.stdout.write(payload if args.format == "json" else dot)
    log.info("%d of %d pairs dependent (%s), %d by correlation", len(hsic_graph.edges), len(hsic_graph.tests),
             args.method, len(corr_graph.edges))
    return EXIT_ACCEPT


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except (UsageError, *USAGE_ERRORS) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_DATA
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.error("internal error: %r", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
