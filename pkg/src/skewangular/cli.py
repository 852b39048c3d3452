"""Command-line entry point: ``skewangular {eval,check,detect,sharpness}``.

Exit codes: 0 success, 2 a bound failed, 3 not an inner-product norm,
64 usage error, 65 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import detector as det
from . import functionals as fn
from .norm_core import (
    NearZeroVector,
    NormGeometryError,
    child_rng,
    format_norm_spec,
    is_inner_product,
    parse_norm_spec,
    parse_vector,
    sample_vectors,
    spec_dim,
    validate_spec,
)
from .report import RunReport, rows_to_csv

EXIT_OK = 0
EXIT_BOUND_FAILURE = 2
EXIT_NOT_INNER_PRODUCT = 3
EXIT_USAGE = 64
EXIT_DATA = 65

SHARPNESS_TOL = 1e-10
CHECK_RADIUS_RANGE = (0.25, 4.0)
CERTIFIED = "certified"
NOT_FOUND = "no violation found at budget"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_spec(text: str):
    try:
        return parse_norm_spec(text)
    except (NormGeometryError, OSError) as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from None


def _resolve_dim(spec, requested: int | None) -> int:
    fixed = spec_dim(spec)
    dim = requested if requested is not None else (fixed or 2)
    try:
        validate_spec(spec, dim)
    except NormGeometryError as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from None
    return dim


# --- eval -------------------------------------------------------------------

def cmd_eval(args) -> tuple[RunReport, int]:
    spec = _parse_spec(args.norm)
    try:
        x = parse_vector(args.x)
        y = parse_vector(args.y)
    except NormGeometryError as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from None
    if x.size != y.size:
        raise UsageError(f"x has dimension {x.size} but y has dimension {y.size}")
    _resolve_dim(spec, x.size)

    geometry = fn.pair_geometry(spec, x, y)
    bounds = (fn.triangle_bounds(spec, x, y) + fn.angular_bounds(spec, x, y)
              + fn.skew_angular_bounds(spec, x, y))
    dw2 = fn.dunkl_williams_2(spec, x, y)
    advisory = []
    if is_inner_product(spec):
        bounds.append(dw2)
    else:
        advisory.append(dw2)
    all_hold = all(b.holds for b in bounds)
    results = {
        "geometry": geometry.to_dict(),
        "maligranda_gap": fn.maligranda_gap(spec, x, y),
        "dehghan_gap": fn.dehghan_gap(spec, x, y),
        "bounds": [b.to_dict() for b in bounds],
        "advisory": [b.to_dict() for b in advisory],
        "all_hold": all_hold,
    }
    if is_inner_product(spec):
        results["euclidean_identity_defect"] = fn.euclidean_identity_defect(spec, x, y)
    report = RunReport("eval", format_norm_spec(spec), {"x": x.tolist(), "y": y.tolist()}, results)
    return report, EXIT_OK if all_hold else EXIT_BOUND_FAILURE


# --- check ------------------------------------------------------------------

def cmd_check(args) -> tuple[RunReport, int]:
    spec = _parse_spec(args.norm)
    dim = _resolve_dim(spec, args.dim)
    if args.pairs < 1:
        raise UsageError("--pairs must be positive")
    x = sample_vectors(spec, dim, args.pairs, child_rng(args.seed, 0), CHECK_RADIUS_RANGE)
    y = sample_vectors(spec, dim, args.pairs, child_rng(args.seed, 1), CHECK_RADIUS_RANGE)
    counts = fn.failure_counts(spec, x, y)

    families: dict[str, int] = {}
    for name, family in fn.BOUND_FAMILIES.items():
        families[family] = families.get(family, 0) + counts[name]
    total = sum(counts.values())
    results = {
        "pairs": args.pairs,
        "failures": counts,
        "bound_families": families,
        "total_failures": total,
        "inner_product_checks": is_inner_product(spec),
    }
    inputs = {"dim": dim, "pairs": args.pairs, "seed": args.seed,
              "radius_range": list(CHECK_RADIUS_RANGE)}
    report = RunReport("check", format_norm_spec(spec), inputs, results)
    return report, EXIT_OK if total == 0 else EXIT_BOUND_FAILURE


# --- detect -----------------------------------------------------------------

def _label(found: bool) -> str:
    return CERTIFIED if found else NOT_FOUND


def cmd_detect(args) -> tuple[RunReport, int]:
    spec = _parse_spec(args.norm)
    dim = _resolve_dim(spec, args.dim)
    config = det.SearchConfig(dim=dim, restarts=args.restarts, seed=args.seed,
                              violation_threshold=args.threshold,
                              max_iters_per_restart=args.max_iters)
    try:
        config.validate()
        gammas = det.grid_gamma(args.gamma_min, args.gamma_max, args.gamma_count)
    except det.InvalidConfig as exc:
        raise UsageError(f"InvalidConfig: {exc}") from None
    if args.workers < 1:
        raise UsageError("--workers must be positive")

    c = det.classify_space(spec, config, gammas, workers=args.workers)
    results = c.to_dict(lorch_limit=args.show_violations)
    results["labels"] = {k: _label(v) for k, v in c.sub_verdicts.items()}
    inputs = {"config": config.to_dict(),
              "gamma_grid": {"min": args.gamma_min, "max": args.gamma_max,
                             "count": args.gamma_count}}
    report = RunReport("detect", format_norm_spec(spec), inputs, results)
    return report, EXIT_NOT_INNER_PRODUCT if c.verdict == det.NOT_INNER_PRODUCT else EXIT_OK


# --- sharpness --------------------------------------------------------------

def sharpness_rows(eps_values) -> list[dict]:
    rows = []
    for eps in eps_values:
        ratio = fn.sharpness_ratio(eps)
        closed = (1 + eps ** 2) / (1 + eps) ** 2
        rows.append({
            "eps": eps,
            "ratio": ratio,
            "closed_form": closed,
            "abs_diff": abs(ratio - closed),
            "one_minus_ratio": 1 - ratio,
            "within_2eps": bool(0 < 1 - ratio <= 2 * eps),
        })
    return rows


def _eps_values(args) -> list[float]:
    if args.eps_list is not None:
        try:
            values = [float(s) for s in args.eps_list.split(",")]
        except ValueError:
            raise UsageError(f"malformed --eps-list {args.eps_list!r}") from None
    else:
        if args.steps < 1:
            raise UsageError("--steps must be positive")
        if args.eps_start <= 0 or args.eps_end <= 0:
            raise UsageError("epsilon values must be positive")
        values = np.geomspace(args.eps_start, args.eps_end, args.steps).tolist()
    if any(not (v > 0 and np.isfinite(v)) for v in values):
        raise UsageError("epsilon values must be positive and finite")
    return values


def cmd_sharpness(args) -> tuple[RunReport, int]:
    eps = _eps_values(args)
    rows = sharpness_rows(eps)
    by_eps = sorted(rows, key=lambda r: -r["eps"])
    gaps = [r["one_minus_ratio"] for r in by_eps]
    monotone = all(a > b for a, b in zip(gaps, gaps[1:]))
    ok = all(r["abs_diff"] <= SHARPNESS_TOL for r in rows)
    results = {
        "rows": rows,
        "max_abs_diff": max(r["abs_diff"] for r in rows),
        "tolerance": SHARPNESS_TOL,
        "all_within_tolerance": ok,
        "all_within_2eps": all(r["within_2eps"] for r in rows),
        "gap_decreasing_with_eps": monotone,
    }
    if args.csv is not None:
        Path(args.csv).write_text(rows_to_csv(rows, list(rows[0])))
    report = RunReport("sharpness", None, {"eps": eps}, results)
    return report, EXIT_OK if ok else EXIT_BOUND_FAILURE


# --- wiring -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="skewangular",
                     description="Angular / skew-angular distance toolkit for normed spaces.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable output")
    common.add_argument("--output", type=Path, help="also write the report to this file")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="distances and bounds for one pair")
    p.add_argument("--norm", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", parents=[common], help="property suite on random pairs")
    p.add_argument("--norm", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--pairs", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("detect", parents=[common], help="inner-product counterexample search")
    p.add_argument("--norm", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=1e-7)
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--gamma-min", type=float, default=1e-3)
    p.add_argument("--gamma-max", type=float, default=1e3)
    p.add_argument("--gamma-count", type=int, default=61)
    p.add_argument("--show-violations", type=int, default=5,
                   help="number of Lorch violations listed in the report")
    p.add_argument("--workers", type=int, default=1, help="threads for restarts")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sharpness", parents=[common], help="best-constant sweep")
    p.add_argument("--eps-list")
    p.add_argument("--eps-start", type=float, default=1e-1)
    p.add_argument("--eps-end", type=float, default=1e-6)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--csv", type=Path, help="write the table as CSV")
    p.set_defaults(func=cmd_sharpness)
    return parser


# flags whose values may legitimately start with '-' (e.g. --y "-1,0")
_VALUE_FLAGS = ("--x", "--y", "--eps-list")


def _glue_values(argv: list[str]) -> list[str]:
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_values(argv))
    try:
        report, code = args.func(args)
    except UsageError as exc:
        print(f"skewangular {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NearZeroVector as exc:
        print(f"skewangular {args.command}: data error: NearZeroVector: {exc}", file=sys.stderr)
        return EXIT_DATA
    text = report.to_pretty() if args.pretty else report.to_json()
    sys.stdout.write(text)
    if args.output is not None:
        args.output.write_text(report.to_json())
    return code


if __name__ == "__main__":
    sys.exit(main())
