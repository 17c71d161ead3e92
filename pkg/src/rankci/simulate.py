"""Simulation harness: scenario generation, FWER estimation, method comparison.

Every run is reproducible bit-for-bit from its scenario: per-rep generators
are spawned from the scenario seed, and the studentized-range quantile used
by the Tukey runs derives its Monte Carlo seed from the same value.  Large-n
comparisons use the bracketing pipeline and Tukey's pairwise procedure (both
polynomial); exact-method runs are meant for small n.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bracket import bracket_cis, hybrid_exact
from .model import RankCIs, Sample, rank_set
from .numerics import McConfig, studentized_range_quantile
from .partition import ci_block_check, ci_level_by_level
from .tukey import tukey_pairwise_cis

__all__ = [
    "Scenario",
    "MethodResult",
    "FwerEstimate",
    "MethodSummary",
    "ComparisonReport",
    "METHODS",
    "generate_scenario",
    "scenario_mc_config",
    "run_method",
    "estimate_fwer",
    "compare_methods",
    "report_rows",
    "write_report_csv",
    "write_report_json",
]

METHODS = ("lr-level", "lr-block", "lr-bracket", "lr-hybrid", "tukey")

SCENARIO_KINDS = ("all-equal", "equal-sigma-uniform", "two-group")


@dataclass(frozen=True)
class Scenario:
    """A repeatable simulation design.

    kind
        "all-equal": every true mean 0, every standard deviation 1
        (``spread``/``sigma2`` unused) — the least favorable design for
        error-rate checks.  "equal-sigma-uniform": true means drawn
        uniformly from [0, spread] fresh each rep, standard deviation 1.
        "two-group": first half of the true means at 0 with standard
        deviation sqrt(0.5), second half at ``spread`` with standard
        deviation ``sigma2``.
    """

    kind: str
    n: int
    seed: int
    reps: int = 200
    spread: float = 5.0
    sigma2: float = 1.0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"kind must be one of {SCENARIO_KINDS}")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.reps < 100:
            raise ValueError("reps must be >= 100")
        if self.kind != "all-equal" and self.spread <= 0:
            raise ValueError("spread must be > 0")
        if self.kind == "two-group" and self.sigma2 <= 0:
            raise ValueError("sigma2 must be > 0")

    def label(self):
        base = f"{self.kind}(n={self.n}"
        if self.kind == "equal-sigma-uniform":
            base += f", spread={self.spread:g}"
        elif self.kind == "two-group":
            base += f", spread={self.spread:g}, sigma2={self.sigma2:g}"
        return base + f", reps={self.reps}, seed={self.seed})"


def _true_parameters(scenario, rng):
    n = scenario.n
    if scenario.kind == "all-equal":
        return np.zeros(n), np.ones(n)
    if scenario.kind == "equal-sigma-uniform":
        return rng.uniform(0.0, scenario.spread, n), np.ones(n)
    h = n // 2
    mu = np.concatenate([np.zeros(h), np.full(n - h, scenario.spread)])
    sigma = np.concatenate([np.full(h, math.sqrt(0.5)), np.full(n - h, scenario.sigma2)])
    return mu, sigma


def generate_scenario(scenario):
    """Materialize every rep as (true_mu, Sample), both in input order."""
    labels = tuple(f"c{i + 1}" for i in range(scenario.n))
    out = []
    for child in np.random.SeedSequence(scenario.seed).spawn(scenario.reps):
        rng = np.random.default_rng(child)
        mu, sigma = _true_parameters(scenario, rng)
        y = rng.normal(mu, sigma)
        out.append((mu, Sample(labels, y, sigma)))
    return out


@dataclass(frozen=True)
class MethodResult:
    """One method's intervals for one sample.

    ``cis`` is the method's contractual answer; the bracketing method also
    carries its inner (contained in exact) and outer (containing exact)
    systems, with ``cis`` aliasing the conservative outer one.
    """

    cis: RankCIs
    inner: RankCIs = None
    outer: RankCIs = None


def scenario_mc_config(scenario, sample_count=None):
    """Quantile-estimation settings derived from a scenario's seed.

    Folds the scenario seed so data draws and quantile draws never share a
    stream but both trace back to the one published seed.
    """
    seed = (int(scenario.seed) * 0x9E3779B97F4A7C15 + 1) % 2**64
    if sample_count is None:
        return McConfig(seed=seed)
    return McConfig(sample_count=sample_count, seed=seed)


def _scenario_mc(scenario, mc):
    return scenario_mc_config(scenario) if mc is None else mc


def run_method(method, sample, alpha=0.05, mc=None, q_cache=None):
    """Dispatch one sample through one named method.

    ``q_cache`` (a mutable mapping) memoizes the Monte Carlo
    studentized-range quantile across samples sharing a standard-deviation
    vector, which is what makes repeated Tukey runs affordable.
    """
    if method == "lr-level":
        return MethodResult(ci_level_by_level(sample, alpha))
    if method == "lr-block":
        return MethodResult(ci_block_check(sample, alpha))
    if method == "lr-hybrid":
        return MethodResult(hybrid_exact(sample, alpha))
    if method == "lr-bracket":
        inner, outer = bracket_cis(sample, alpha, adjust_lower=True)
        return MethodResult(outer, inner=inner, outer=outer)
    if method == "tukey":
        mc = McConfig() if mc is None else mc
        if q_cache is None:
            q = studentized_range_quantile(sample.sigma, 1.0 - alpha, mc)
        else:
            key = (sample.sigma.tobytes(), alpha, mc.sample_count, mc.seed)
            q = q_cache.get(key)
            if q is None:
                q = studentized_range_quantile(sample.sigma, 1.0 - alpha, mc)
                q_cache[key] = q
        return MethodResult(tukey_pairwise_cis(sample, alpha, q=q))
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def _covers_true_ranks(cis, sample, true_mu):
    """True when every center's true rank set sits inside its interval."""
    true_sets = rank_set(true_mu)
    lo, hi = cis.lo, cis.hi
    for k in range(sample.n):
        a, b = true_sets[int(sample.original_index[k])]
        if a < lo[k] or b > hi[k]:
            return False
    return True


@dataclass(frozen=True)
class FwerEstimate:
    method: str
    proportion: float
    se: float
    reps: int
    alpha: float


def estimate_fwer(method, scenario, alpha=0.05, mc=None):
    """Monte Carlo familywise error rate of ``method`` on ``scenario``.

    A rep errs when any center's true rank set escapes its interval; the
    returned standard error is the binomial one at the observed proportion.
    """
    mc = _scenario_mc(scenario, mc)
    q_cache = {}
    errors = 0
    for true_mu, sample in generate_scenario(scenario):
        result = run_method(method, sample, alpha, mc, q_cache)
        if not _covers_true_ranks(result.cis, sample, true_mu):
            errors += 1
    p = errors / scenario.reps
    se = math.sqrt(p * (1.0 - p) / scenario.reps)
    return FwerEstimate(method, p, se, scenario.reps, alpha)


@dataclass(frozen=True)
class MethodSummary:
    """Aggregates for one method over a scenario's reps."""

    method: str
    mean_width: float
    fwer: float
    se: float
    per_center_width: tuple
    gap_stats: dict = None


@dataclass(frozen=True)
class ComparisonReport:
    scenario: Scenario
    alpha: float
    summaries: tuple = field(default_factory=tuple)

    def summary(self, method):
        for s in self.summaries:
            if s.method == method:
                return s
        raise KeyError(method)


def compare_methods(scenario, alpha=0.05, methods=("lr-bracket", "tukey"), mc=None):
    """Run several methods over one scenario and aggregate widths and errors.

    Reports, per method: mean interval width (in ranks), the per-center
    mean width curve (sorted-center positions), and the empirical
    familywise error.  The bracketing method additionally reports gap
    statistics between its outer and inner systems — mean and max gap in
    ranks, and the proportion of centers the brackets settle exactly.
    """
    mc = _scenario_mc(scenario, mc)
    q_cache = {}
    n = scenario.n
    reps = scenario.reps
    width_sums = {m: np.zeros(n) for m in methods}
    errors = {m: 0 for m in methods}
    gap_sum = 0.0
    gap_max = 0
    settled = 0
    pointwise_rank = np.arange(1, n + 1)
    for true_mu, sample in generate_scenario(scenario):
        for method in methods:
            result = run_method(method, sample, alpha, mc, q_cache)
            cis = result.cis
            if np.any(cis.lo > pointwise_rank) or np.any(cis.hi < pointwise_rank):
                raise AssertionError(f"{method}: empirical rank escaped its interval")
            width_sums[method] += cis.widths()
            if not _covers_true_ranks(cis, sample, true_mu):
                errors[method] += 1
            if method == "lr-bracket":
                gaps = result.outer.widths() - result.inner.widths()
                gap_sum += float(gaps.sum())
                gap_max = max(gap_max, int(gaps.max()))
                settled += int((gaps == 0).sum())
    summaries = []
    for method in methods:
        curve = width_sums[method] / reps
        p = errors[method] / reps
        gap_stats = None
        if method == "lr-bracket":
            gap_stats = {
                "meanGap": gap_sum / (reps * n),
                "maxGap": gap_max,
                "settledProportion": settled / (reps * n),
            }
        summaries.append(
            MethodSummary(
                method,
                float(curve.mean()),
                p,
                math.sqrt(p * (1.0 - p) / reps),
                tuple(float(v) for v in curve),
                gap_stats,
            )
        )
    return ComparisonReport(scenario, alpha, tuple(summaries))


def report_rows(report):
    """Flatten a :class:`ComparisonReport` into schema rows.

    Row keys: scenario, method, meanWidth, fwer, se, gapStats.
    """
    label = report.scenario.label()
    rows = []
    for s in report.summaries:
        rows.append(
            {
                "scenario": label,
                "method": s.method,
                "meanWidth": s.mean_width,
                "fwer": s.fwer,
                "se": s.se,
                "gapStats": s.gap_stats,
            }
        )
    return rows


def write_report_csv(report, path):
    """Summary table, one row per method; gap statistics JSON-encoded."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["scenario", "method", "meanWidth", "fwer", "se", "gapStats"]
        )
        writer.writeheader()
        for row in report_rows(report):
            row = dict(row)
            row["gapStats"] = "" if row["gapStats"] is None else json.dumps(row["gapStats"])
            writer.writerow(row)


def write_report_json(report, path):
    """Machine-readable report: schema rows plus per-center width curves."""
    payload = {
        "scenario": {
            "kind": report.scenario.kind,
            "n": report.scenario.n,
            "seed": report.scenario.seed,
            "reps": report.scenario.reps,
            "spread": report.scenario.spread,
            "sigma2": report.scenario.sigma2,
        },
        "alpha": report.alpha,
        "results": [
            dict(row, perCenterWidth=list(report.summary(row["method"]).per_center_width))
            for row in report_rows(report)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
