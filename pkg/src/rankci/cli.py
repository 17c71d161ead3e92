"""Command-line front end: rank CIs for a CSV of estimates, or simulation runs.

Input is a UTF-8 CSV with header ``name,estimate,stddev``.  The tool sorts
internally but reports in the original row order, emitting a rank-interval
table (``<stem>.ranks.csv`` or ``.json``) plus a plot-ready file of interval
endpoints ordered by estimate (``<stem>.plotdata.csv``).  ``--simulate``
switches to the simulation harness and emits its report files instead.
"""

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bracket import bracket_cis
from .model import Sample
from .numerics import McConfig, studentized_range_quantile
from .partition import ci_block_check, ci_level_by_level
from .simulate import (
    METHODS,
    MethodResult,
    Scenario,
    compare_methods,
    run_method,
    scenario_mc_config,
    write_report_csv,
    write_report_json,
)
from .tukey import tukey_pairwise_cis

__all__ = ["RunConfig", "ingest", "write_sample_csv", "run", "main"]

#: Above this size the exact enumeration methods stop being the default.
EXACT_DEFAULT_LIMIT = 25


def ingest(path):
    """Read ``name,estimate,stddev`` rows into a Sample.

    Rejects missing columns, empty names, non-numeric or non-finite
    numbers, and non-positive standard deviations — each diagnostic cites
    the offending file row (the header is row 1).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file, expected a name,estimate,stddev header")
        missing = {"name", "estimate", "stddev"} - set(reader.fieldnames)
        if missing:
            raise ValueError(f"{path}: missing column(s) {', '.join(sorted(missing))}")
        names, estimates, stddevs = [], [], []
        for rownum, row in enumerate(reader, start=2):
            name = (row["name"] or "").strip()
            if not name:
                raise ValueError(f"{path} row {rownum}: empty name")
            try:
                est = float(row["estimate"])
                sd = float(row["stddev"])
            except (TypeError, ValueError):
                raise ValueError(
                    f"{path} row {rownum}: estimate and stddev must be numeric, "
                    f"got {row['estimate']!r} and {row['stddev']!r}"
                ) from None
            if not (math.isfinite(est) and math.isfinite(sd)):
                raise ValueError(f"{path} row {rownum}: non-finite value")
            if sd <= 0:
                raise ValueError(f"{path} row {rownum}: stddev must be > 0, got {sd:g}")
            names.append(name)
            estimates.append(est)
            stddevs.append(sd)
    if not names:
        raise ValueError(f"{path}: no data rows")
    return Sample(names, estimates, stddevs)


def write_sample_csv(sample, path):
    """Emit a sample back to CSV in its original input order (ingest's inverse)."""
    inv = _input_to_sorted(sample)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "estimate", "stddev"])
        for i in range(sample.n):
            k = inv[i]
            writer.writerow([sample.labels[k], repr(float(sample.y[k])), repr(float(sample.sigma[k]))])


def _input_to_sorted(sample):
    inv = np.empty(sample.n, dtype=int)
    inv[sample.original_index] = np.arange(sample.n)
    return inv


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI analysis run depends on."""

    input_path: str
    alpha: float = 0.05
    method: str = None  # None = auto: exact hybrid when small, bracketing when large
    seed: int = 0
    mc_samples: int = 200_000
    output_format: str = "csv"
    tangent_points: tuple = None
    force_exact: bool = False
    output_dir: str = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.method is not None and self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.output_format not in ("csv", "json"):
            raise ValueError("format must be csv or json")


def _choose_method(config, n):
    if config.method is not None:
        return config.method
    return "lr-hybrid" if n <= EXACT_DEFAULT_LIMIT else "lr-bracket"


def _execute(config, sample):
    method = _choose_method(config, sample.n)
    n = sample.n
    tangents = config.tangent_points
    if tangents is None:
        tangents = (n // 2, n // 4)
    mc = McConfig(sample_count=config.mc_samples, seed=config.seed)
    if method == "lr-bracket":
        inner, outer = bracket_cis(
            sample, config.alpha, tangent_points=tangents, adjust_lower=True
        )
        return method, MethodResult(outer, inner=inner, outer=outer)
    if method == "lr-level":
        return method, MethodResult(
            ci_level_by_level(sample, config.alpha, force=config.force_exact)
        )
    if method == "lr-block":
        return method, MethodResult(
            ci_block_check(sample, config.alpha, force=config.force_exact)
        )
    if method == "tukey":
        q = studentized_range_quantile(sample.sigma, 1.0 - config.alpha, mc)
        return method, MethodResult(tukey_pairwise_cis(sample, config.alpha, q=q))
    return method, run_method(method, sample, config.alpha, mc)


def _table_rows(sample, result):
    """Per-center output rows, in the original input order."""
    inv = _input_to_sorted(sample)
    cis = result.cis
    rows = []
    for i in range(sample.n):
        k = int(inv[i])
        row = {
            "name": sample.labels[k],
            "estimate": float(sample.y[k]),
            "stddev": float(sample.sigma[k]),
            "empirical_rank": k + 1,
            "rank_lo": int(cis.lo[k]),
            "rank_hi": int(cis.hi[k]),
        }
        if result.inner is not None:
            row["rank_lo_inner"] = int(result.inner.lo[k])
            row["rank_hi_inner"] = int(result.inner.hi[k])
            row["settled"] = bool(
                result.inner.intervals[k] == result.outer.intervals[k]
            )
        rows.append(row)
    return rows


def _plot_rows(sample, result):
    """Interval endpoints by ascending estimate — the data behind CI plots."""
    cis = result.cis
    rows = []
    for k in range(sample.n):
        row = {
            "position": k + 1,
            "name": sample.labels[k],
            "estimate": float(sample.y[k]),
            "rank_lo": int(cis.lo[k]),
            "rank_hi": int(cis.hi[k]),
        }
        if result.inner is not None:
            row["rank_lo_inner"] = int(result.inner.lo[k])
            row["rank_hi_inner"] = int(result.inner.hi[k])
        rows.append(row)
    return rows


def _write_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def run(config):
    """Execute one analysis run; returns the process exit code."""
    start = time.perf_counter()
    sample = ingest(config.input_path)
    method, result = _execute(config, sample)
    elapsed = time.perf_counter() - start
    in_path = Path(config.input_path)
    out_dir = Path(config.output_dir) if config.output_dir else in_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = out_dir / in_path.stem
    table = _table_rows(sample, result)
    if config.output_format == "json":
        ranks_path = stem.with_suffix(".ranks.json")
        payload = {
            "metadata": {
                "input": str(config.input_path),
                "method": method,
                "alpha": config.alpha,
                "seed": config.seed,
                "mcSamples": config.mc_samples,
                "wallTimeSeconds": elapsed,
            },
            "centers": table,
        }
        with open(ranks_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        ranks_path = stem.with_suffix(".ranks.csv")
        _write_csv(table, ranks_path)
    plot_path = stem.with_suffix(".plotdata.csv")
    _write_csv(_plot_rows(sample, result), plot_path)
    print(f"{method}: n={sample.n}, alpha={config.alpha:g} -> {ranks_path} and {plot_path}")
    return 0


def _parse_scenario_spec(text, default_seed):
    """Parse "key=value,..." into a Scenario plus the methods to compare.

    Keys: kind, n, reps, seed, range (or spread), sigma2, methods
    (plus-separated method names).
    """
    kv = {}
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        key, sep, value = token.partition("=")
        if not sep:
            raise ValueError(f"scenario token {token!r} is not key=value")
        kv[key.strip()] = value.strip()
    methods = tuple(kv.pop("methods", "lr-bracket+tukey").split("+"))
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r} in scenario spec")
    spread = kv.pop("range", None)
    if spread is None:
        spread = kv.pop("spread", "5")
    else:
        kv.pop("spread", None)
    scenario = Scenario(
        kind=kv.pop("kind", "equal-sigma-uniform"),
        n=int(kv.pop("n", "30")),
        seed=int(kv.pop("seed", str(default_seed))),
        reps=int(kv.pop("reps", "200")),
        spread=float(spread),
        sigma2=float(kv.pop("sigma2", "1")),
    )
    if kv:
        raise ValueError(f"unknown scenario key(s): {', '.join(sorted(kv))}")
    return scenario, methods


def _run_simulation(args):
    scenario, methods = _parse_scenario_spec(args.simulate, args.seed)
    mc = scenario_mc_config(scenario, args.mc_samples)
    report = compare_methods(scenario, args.alpha, methods, mc)
    out_dir = Path(args.output_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = out_dir / f"sim-{scenario.kind}-n{scenario.n}"
    csv_path = stem.with_suffix(".report.csv")
    json_path = stem.with_suffix(".report.json")
    write_report_csv(report, csv_path)
    write_report_json(report, json_path)
    print(scenario.label())
    for s in report.summaries:
        line = f"  {s.method}: mean width {s.mean_width:.3f}, fwer {s.fwer:.4f} (se {s.se:.4f})"
        if s.gap_stats is not None:
            line += (
                f", gap mean {s.gap_stats['meanGap']:.3f} max {s.gap_stats['maxGap']}"
                f", settled {s.gap_stats['settledProportion']:.1%}"
            )
        print(line)
    print(f"report -> {csv_path} and {json_path}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="rankci",
        description=(
            "Simultaneous confidence intervals for the ranks of Gaussian "
            "center estimates with known standard deviations."
        ),
    )
    parser.add_argument("--input", "-i", help="CSV file with name,estimate,stddev rows")
    parser.add_argument("--alpha", type=float, default=0.05,
                        help="simultaneous error level (default 0.05)")
    parser.add_argument("--method", choices=METHODS, default=None,
                        help="default: lr-hybrid up to n=25, lr-bracket beyond")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for all Monte Carlo draws (default 0)")
    parser.add_argument("--mc-samples", type=int, default=200_000, dest="mc_samples",
                        help="draw count for quantile estimation (default 200000)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        dest="output_format", help="rank-table format (default csv)")
    parser.add_argument("--tangent-points", default=None,
                        help="comma-separated extra touch points for the bracket "
                             "upper bound (default: n/2,n/4)")
    parser.add_argument("--force-exact", action="store_true",
                        help="lift the n-guard on the exact enumeration methods")
    parser.add_argument("--simulate", default=None, metavar="SPEC",
                        help="run the simulation harness instead of analyzing a file; "
                             "SPEC is key=value pairs, e.g. "
                             "kind=two-group,n=30,range=10,sigma2=4,reps=200,seed=1")
    parser.add_argument("--output-dir", default=None,
                        help="directory for output files (default: alongside the input)")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.simulate is not None:
            if args.input is not None:
                raise ValueError("--simulate and --input are mutually exclusive")
            return _run_simulation(args)
        if args.input is None:
            raise ValueError("--input is required (or use --simulate)")
        tangents = None
        if args.tangent_points is not None:
            tangents = tuple(
                int(t) for t in args.tangent_points.split(",") if t.strip()
            )
        config = RunConfig(
            input_path=args.input,
            alpha=args.alpha,
            method=args.method,
            seed=args.seed,
            mc_samples=args.mc_samples,
            output_format=args.output_format,
            tangent_points=tangents,
            force_exact=args.force_exact,
            output_dir=args.output_dir,
        )
        return run(config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
