"""Command-line entry point: ``sphere-lab <subcommand> ...``.

Exit codes: 0 pass, 1 experiment failed its threshold, 2 usage error,
3 runtime error. ``SPHERE_LAB_THREADS`` sets the worker count and never
changes results.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from ..limit_laws import finite_n_cdf_m1, limit_cdf_m1, normal_params, theorem2_normalize
from ..sampler import EnsembleSpec, sample_batch, sample_traces
from ..streams import U64_MAX
from .experiments import (
    CostGuardError,
    ExperimentReport,
    convergence_sweep,
    run_oracle_comparison,
    run_theorem1,
    run_theorem2,
)
from .io import write_csv, write_json

log = logging.getLogger("sphere_lab")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:step`` -> ``lo, lo+step, ...`` up to and including ``hi``."""
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like lo:hi:step, got {text!r}") from None
    if not step > 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"grid needs step > 0 and hi >= lo, got {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workers", type=_positive_int, default=None, help="worker processes (default: all cores)")


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", required=True, type=Path, help="report path")
    p.add_argument("--csv", type=Path, default=None, help="ECDF grid path (default: next to the report)")
    p.add_argument("--reproducible", action="store_true", help="record runtime_ms as 0 so reports are byte-stable")
    _common(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sphere-lab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw log spectral radii")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--samples", type=_positive_int, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--scale", choices=["none", "theorem1", "theorem2"], default="none")
    p.add_argument("--trace", action="store_true", help="also write per-index columns v_1..v_n")
    p.add_argument("--out", type=Path, required=True)
    _common(p)

    p = sub.add_parser("limit-cdf", help="tabulate the m=1 limit CDF H")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--grid", type=parse_grid, required=True)
    p.add_argument("--eps", type=_positive_float, default=1e-10)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("finite-cdf", help="tabulate the exact m=1 CDF of M_n")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--grid", type=parse_grid, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("theorem1", help="fixed-m limit experiment")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--samples", type=_positive_int, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--ref-samples", type=_positive_int, default=None)
    p.add_argument("--i-max", type=int, default=None)
    p.add_argument("--reference", choices=["limit", "finite"], default="limit")
    p.add_argument("--eps", type=_positive_float, default=1e-10)
    p.add_argument("--threshold", type=_positive_float, default=None)
    _experiment_flags(p)

    p = sub.add_parser("theorem2", help="divergent-m normal limit experiment")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--samples", type=_positive_int, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--threshold", type=_positive_float, default=None)
    _experiment_flags(p)

    p = sub.add_parser("oracle-compare", help="matrix simulation vs Gamma representation")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--samples", type=_positive_int, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    _experiment_flags(p)

    p = sub.add_parser("sweep", help="KS statistic across a list of n")
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--m-rule", required=True, help="fixed:k | equal-n | sqrt-n | log-n")
    p.add_argument("--samples", type=_positive_int, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--json", type=Path, default=None)
    p.add_argument("--reproducible", action="store_true")
    _common(p)
    return parser


def _cmd_sample(args) -> int:
    spec = EnsembleSpec(args.n, args.m)
    if args.trace:
        traces = sample_traces(spec, args.samples, args.seed, args.workers)
        values = traces.max(axis=1)
    else:
        traces = None
        values = sample_batch(spec, args.samples, args.seed, args.workers).values
    # The same increasing affine map goes on the trace, so value == max(v_i) still holds.
    if args.scale == "theorem1":
        shift, scale = 0.5 * args.m * math.log(args.n), 1.0
    elif args.scale == "theorem2":
        params = normal_params(args.n, args.m)
        shift, scale = params.mu_n, params.sigma_n
    else:
        shift, scale = 0.0, 1.0
    values = (values - shift) / scale
    header = ["index", "value"]
    if traces is not None:
        traces = (traces - shift) / scale
        header += [f"v_{i}" for i in range(1, args.n + 1)]
        rows = ([k, values[k], *traces[k]] for k in range(args.samples))
    else:
        rows = ([k, values[k]] for k in range(args.samples))
    write_csv(args.out, header, rows)
    return EXIT_PASS


def _cmd_limit_cdf(args) -> int:
    if args.m != 1:
        raise UsageError("limit-cdf has a closed form only for m = 1; use theorem1 for m >= 2")
    if np.any(args.grid <= 0):
        raise UsageError("grid points must be positive")
    write_csv(args.out, ["x", "cdf"], zip(args.grid, limit_cdf_m1(args.grid, args.eps)))
    return EXIT_PASS


def _cmd_finite_cdf(args) -> int:
    if np.any(args.grid <= 0):
        raise UsageError("grid points must be positive")
    write_csv(args.out, ["x", "cdf"], zip(args.grid, finite_n_cdf_m1(args.n, args.grid)))
    return EXIT_PASS


def _finish(report: ExperimentReport, json_path: Path | None, reproducible: bool) -> int:
    if reproducible:
        report.runtime_ms = 0
    if json_path is not None:
        write_json(json_path, report.to_dict())
    log.info("%s: statistic=%.6g threshold=%.6g pass=%s", report.experiment, report.statistic, report.threshold, report.passed)
    print(f"{report.experiment}: statistic={report.statistic:.6g} threshold={report.threshold:.6g} "
          f"{'PASS' if report.passed else 'FAIL'}")
    return EXIT_PASS if report.passed else EXIT_FAIL


def _csv_for(args) -> Path:
    return args.csv if args.csv is not None else args.json.with_name(args.json.stem + "_ecdf.csv")


def _cmd_theorem1(args) -> int:
    if args.i_max is not None and args.i_max < 3:
        raise UsageError("--i-max must be >= 3")
    report = run_theorem1(
        args.n,
        args.m,
        args.samples,
        args.seed,
        reference=args.reference,
        eps=args.eps,
        ref_samples=args.ref_samples,
        i_max=args.i_max,
        threshold=args.threshold,
        workers=args.workers,
        csv_path=_csv_for(args),
    )
    return _finish(report, args.json, args.reproducible)


def _cmd_theorem2(args) -> int:
    if args.n < 2:
        raise UsageError("theorem2 needs n >= 2")
    report = run_theorem2(
        args.n, args.m, args.samples, args.seed, threshold=args.threshold, workers=args.workers, csv_path=_csv_for(args)
    )
    return _finish(report, args.json, args.reproducible)


def _cmd_oracle(args) -> int:
    try:
        report = run_oracle_comparison(
            args.n, args.m, args.samples, args.seed, workers=args.workers, csv_path=_csv_for(args)
        )
    except CostGuardError as exc:
        raise UsageError(str(exc)) from None
    return _finish(report, args.json, args.reproducible)


def _cmd_sweep(args) -> int:
    try:
        report, _ = convergence_sweep(
            args.n_list, args.m_rule, args.samples, args.seed, workers=args.workers, csv_path=args.out
        )
    except ValueError as exc:
        if "m rule" in str(exc) or "fixed m" in str(exc):
            raise UsageError(str(exc)) from None
        raise
    return _finish(report, args.json, args.reproducible)


COMMANDS = {
    "sample": _cmd_sample,
    "limit-cdf": _cmd_limit_cdf,
    "finite-cdf": _cmd_finite_cdf,
    "theorem1": _cmd_theorem1,
    "theorem2": _cmd_theorem2,
    "oracle-compare": _cmd_oracle,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"sphere-lab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - surfaced as exit code 3
        log.debug("runtime failure", exc_info=True)
        print(f"sphere-lab {args.command}: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
