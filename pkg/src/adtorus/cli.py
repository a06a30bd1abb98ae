"""Command-line surface: single evaluations, h-sweeps and machine-readable tables.

Exit codes: 0 success, 2 usage or parse error, 3 resource limit hit,
4 precision exhausted.  Output is CSV (RFC 4180, header row, 17 significant
digits) or JSON, selected by --format; numbers are locale-independent either
way.  Thresholds are absolute by default, reduced units (mu = lam / 4 pi^2)
with --reduced, which is also what the exact-arithmetic path expects.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import heat, leafwise, slope, spectrum, weyl

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_PRECISION = 4

_RESOURCE_ERRORS = (
    spectrum.InstanceTooLargeError,
    spectrum.StripOverflowError,
    spectrum.TooManyEigenvaluesError,
)

ALL_OUTPUTS = ("exact_count", "asym_closed_form", "weyl", "residual")


class UsageError(ValueError):
    pass


@dataclass
class SweepSpec:
    slope: slope.Slope
    lam: float
    h_values: list[float]
    tie_tolerance: float = 0.0
    outputs: tuple[str, ...] = ALL_OUTPUTS

    def __post_init__(self):
        if not self.h_values:
            raise UsageError("empty h grid")
        if any(not (0.0 < h <= 1.0) for h in self.h_values):
            raise UsageError("all h values must lie in (0, 1]")
        bad = set(self.outputs) - set(ALL_OUTPUTS)
        if bad:
            raise UsageError(f"unknown outputs: {sorted(bad)}")
        if "residual" in self.outputs and not (
            "exact_count" in self.outputs and "asym_closed_form" in self.outputs
        ):
            raise UsageError("residual needs both exact_count and asym_closed_form")


ROW_FIELDS = (
    "h", "N_h", "hN_h", "asym", "weyl", "residual", "near_boundary", "wall_time_ms",
)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return format(x, ".17g")


def _emit_rows(rows: list[dict], fmt: str, stream) -> None:
    if fmt == "csv":
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(ROW_FIELDS)
        for row in rows:
            writer.writerow([_fmt(row.get(f)) for f in ROW_FIELDS])
    else:
        out = [{f: row.get(f) for f in ROW_FIELDS if row.get(f) is not None} for row in rows]
        stream.write(json.dumps(out, indent=2) + "\n")


def _window(lam_text: str, reduced: bool, exact: bool) -> spectrum.EnergyWindow:
    if reduced:
        if exact:
            return spectrum.EnergyWindow.reduced(Fraction(lam_text))
        return spectrum.EnergyWindow.reduced(float(lam_text))
    if exact:
        raise UsageError("--exact-arith needs --reduced (exactness lives in mu units)")
    return spectrum.EnergyWindow.absolute(float(lam_text))


def _report_row(s, h, win, tol, outputs, exact_arith=False):
    t0 = time.perf_counter()
    row: dict = {"h": h}
    count = None
    if "exact_count" in outputs:
        res = spectrum.count_exact(s, h, win, tol=tol, exact_arith=exact_arith)
        count = res.count
        row["N_h"] = count
        row["hN_h"] = h * count
        row["near_boundary"] = res.near_boundary
    if "asym_closed_form" in outputs:
        row["asym"] = weyl.asymptotic_count(s, h, win.lam)
    if "weyl" in outputs:
        row["weyl"] = weyl.weyl_estimate(s, h, weyl.WeylParams(q=1, lam=win.lam))
    if "residual" in outputs and count is not None:
        row["residual"] = h * count - h * row["asym"]
    row["wall_time_ms"] = (time.perf_counter() - t0) * 1e3
    return row


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--reduced", action="store_true",
                   help="threshold is mu = lam / 4 pi^2 instead of lam")
    p.add_argument("--tol", type=float, default=0.0, help="boundary tie tolerance")
    p.add_argument("--eps", type=float, default=1e-12, help="series tail budget")
    p.add_argument("--threads", type=int, default=1)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="adtorus",
        description="eigenvalue counting and heat traces for adiabatic torus foliations",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="exact eigenvalue count below a threshold")
    p.add_argument("slope")
    p.add_argument("h", type=float)
    p.add_argument("lam")
    p.add_argument("--exact-arith", action="store_true",
                   help="integer-arithmetic counting (rational slope, --reduced)")
    _add_common(p)

    p = sub.add_parser("asym", help="closed-form small-h estimate")
    p.add_argument("slope")
    p.add_argument("h", type=float)
    p.add_argument("lam")
    _add_common(p)

    p = sub.add_parser("weyl", help="transverse Weyl convolution estimate")
    p.add_argument("slope")
    p.add_argument("h", type=float)
    p.add_argument("lam")
    p.add_argument("--qdim", type=int, default=1, help="transverse dimension")
    p.add_argument("--quad-tol", type=float, default=1e-10)
    _add_common(p)

    p = sub.add_parser("leafwise", help="leafwise distribution function as JSON")
    p.add_argument("slope")
    p.add_argument("--lambda-max", type=float, default=None,
                   help="construction cap (required for rational slopes)")
    _add_common(p)

    p = sub.add_parser("heat", help="heat trace by both series plus discrepancy")
    p.add_argument("slope")
    p.add_argument("h", type=float)
    p.add_argument("t", type=float)
    _add_common(p)

    p = sub.add_parser("sweep", help="table of counts over an h grid")
    p.add_argument("slope", nargs="?")
    p.add_argument("lam", nargs="?")
    p.add_argument("--h-values", help="comma-separated explicit h grid")
    p.add_argument("--h-start", type=float)
    p.add_argument("--h-end", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--outputs", help="comma-separated subset of " + ",".join(ALL_OUTPUTS))
    p.add_argument("--config", help="JSON file mirroring the sweep spec")
    _add_common(p)

    p = sub.add_parser("cf", help="continued fraction report")
    p.add_argument("slope")
    p.add_argument("n", nargs="?", default=None,
                   help="number of quotients ('-' or omitted: full, rationals only)")
    _add_common(p)

    p = sub.add_parser("eig", help="all eigenvalues below a threshold")
    p.add_argument("slope")
    p.add_argument("h", type=float)
    p.add_argument("lam")
    _add_common(p)

    return ap


def _geometric_grid(start: float, end: float, points: int) -> list[float]:
    if points < 1 or start <= end:
        raise UsageError("geometric grid needs points >= 1 and h_start > h_end")
    if points == 1:
        return [start]
    ratio = (end / start) ** (1.0 / (points - 1))
    return [start * ratio ** i for i in range(points)]


def _sweep_spec(args) -> SweepSpec:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)

    slope_text = args.slope or cfg.get("slope")
    lam_text = args.lam if args.lam is not None else cfg.get("lambda")
    if slope_text is None or lam_text is None:
        raise UsageError("sweep needs a slope and a threshold (arguments or --config)")

    if args.h_values:
        h_values = [float(x) for x in args.h_values.split(",") if x]
    elif args.h_start is not None and args.h_end is not None and args.points:
        h_values = _geometric_grid(args.h_start, args.h_end, args.points)
    elif "h_values" in cfg:
        hv = cfg["h_values"]
        if isinstance(hv, dict):
            h_values = _geometric_grid(float(hv["start"]), float(hv["end"]), int(hv["points"]))
        else:
            h_values = [float(x) for x in hv]
    else:
        raise UsageError("sweep needs --h-values or a geometric grid or config h_values")

    outputs = ALL_OUTPUTS
    if args.outputs:
        outputs = tuple(x for x in args.outputs.split(",") if x)
    elif "outputs" in cfg:
        outputs = tuple(cfg["outputs"])

    tol = args.tol if args.tol else float(cfg.get("tie_tolerance", 0.0))
    s = slope.parse_slope(str(slope_text))
    lam = float(lam_text) * (spectrum.FOUR_PI_SQ if args.reduced else 1.0)
    return SweepSpec(s, lam, h_values, tol, outputs)


def _run_count(args, stream) -> int:
    s = slope.parse_slope(args.slope)
    win = _window(args.lam, args.reduced, args.exact_arith)
    row = _report_row(s, args.h, win, args.tol, ALL_OUTPUTS, exact_arith=args.exact_arith)
    _emit_rows([row], args.format, stream)
    return EXIT_OK


def _run_asym(args, stream) -> int:
    s = slope.parse_slope(args.slope)
    win = _window(args.lam, args.reduced, exact=False)
    stream.write(_fmt(weyl.asymptotic_count(s, args.h, win.lam)) + "\n")
    return EXIT_OK


def _run_weyl(args, stream) -> int:
    s = slope.parse_slope(args.slope)
    win = _window(args.lam, args.reduced, exact=False)
    params = weyl.WeylParams(q=args.qdim, lam=win.lam, quadrature_tolerance=args.quad_tol)
    stream.write(_fmt(weyl.weyl_estimate(s, args.h, params)) + "\n")
    return EXIT_OK


def _run_leafwise(args, stream) -> int:
    s = slope.parse_slope(args.slope)
    spec = leafwise.leafwise_df(s, lambda_max=args.lambda_max)
    stream.write(leafwise.df_to_json(spec.df) + "\n")
    return EXIT_OK


def _run_heat(args, stream) -> int:
    s = slope.parse_slope(args.slope)
    spec_res = heat.heat_trace_spectral(s, args.h, args.t, eps=args.eps)
    img_res = heat.heat_trace_image(s, args.h, args.t, eps=args.eps)
    payload = {
        "spectral": spec_res.value,
        "image": img_res.value,
        "discrepancy": abs(spec_res.value - img_res.value),
        "spectral_bound": spec_res.truncation_bound,
        "image_bound": img_res.truncation_bound,
    }
    if args.format == "json":
        stream.write(json.dumps(payload, indent=2) + "\n")
    else:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(payload.keys())
        writer.writerow(_fmt(v) for v in payload.values())
    return EXIT_OK


def _run_sweep(args, stream) -> int:
    spec = _sweep_spec(args)
    win = spectrum.EnergyWindow.absolute(spec.lam)
    h_desc = sorted(spec.h_values, reverse=True)

    def job(h):
        return _report_row(spec.slope, h, win, spec.tie_tolerance, spec.outputs)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(job, h_desc))
    else:
        rows = [job(h) for h in h_desc]
    _emit_rows(rows, args.format, stream)
    return EXIT_OK


def _run_cf(args, stream) -> int:
    s = slope.parse_slope(args.slope)
    n = None if args.n in (None, "-") else int(args.n)
    cf = slope.continued_fraction(s, n)
    alpha = slope.slope_value(s)
    rows = [
        {"n": i, "a_n": a, "p_n": conv.numerator, "q_n": conv.denominator,
         "abs_error": abs(alpha - conv.numerator / conv.denominator)}
        for i, (a, conv) in enumerate(zip(cf.partial_quotients, cf.convergents))
    ]
    if args.format == "json":
        stream.write(json.dumps(rows, indent=2) + "\n")
    else:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(("n", "a_n", "p_n", "q_n", "abs_error"))
        for r in rows:
            writer.writerow((r["n"], r["a_n"], r["p_n"], r["q_n"], _fmt(r["abs_error"])))
    return EXIT_OK


def _run_eig(args, stream) -> int:
    s = slope.parse_slope(args.slope)
    win = _window(args.lam, args.reduced, exact=False)
    records = spectrum.eigenvalues_below(s, args.h, win)
    if args.format == "json":
        stream.write(json.dumps(
            [{"k": r.k, "l": r.l, "value": r.value} for r in records], indent=2
        ) + "\n")
    else:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(("k", "l", "value"))
        for r in records:
            writer.writerow((r.k, r.l, _fmt(r.value)))
    return EXIT_OK


_RUNNERS = {
    "count": _run_count,
    "asym": _run_asym,
    "weyl": _run_weyl,
    "leafwise": _run_leafwise,
    "heat": _run_heat,
    "sweep": _run_sweep,
    "cf": _run_cf,
    "eig": _run_eig,
}


def main(argv=None, stream=None) -> int:
    stream = stream or sys.stdout
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return _RUNNERS[args.command](args, stream)
    except slope.PrecisionExhaustedError as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except _RESOURCE_ERRORS as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
