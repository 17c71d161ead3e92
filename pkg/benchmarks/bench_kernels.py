"""Benchmark the compiled kernels against the pure-Python fallbacks.

Times four kernel-bound workloads on identical inputs per backend:

  mask-sweep-sum     all 2^(n-1) gap masks, summed block scores, no
                     skip filter (raw kernel call)
  mask-sweep-max     the same sweep with max aggregation (raw kernel)
  all-partitions     union over every ordered set partition (driver)
  contribution-fill  O(n^3) minimum-contribution table for the bracket

Run ``--compare`` to measure both backends in subprocesses (the backend
is fixed at import time via RANKCI_PURE) and print a speedup table; a
bare run times whichever backend the current process imported.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def build_instances(args):
    rng = np.random.default_rng(7)

    def sample(n):
        from rankci.model import Sample

        y = rng.normal(0.0, 2.0, n)
        sigma = rng.uniform(0.3, 3.0, n)
        return Sample([f"c{i}" for i in range(n)], y, sigma)

    return {
        "mask-sweep": sample(args.sweep_n),
        "all-partitions": sample(args.partitions_n),
        "contribution-fill": sample(args.fill_n),
    }


def workloads(instances):
    from rankci import kernels
    from rankci.bracket import build_affine_bounds, min_contrib_matrix
    from rankci.model import CriticalPolicy
    from rankci.partition import block_sse_table, ci_all_partitions

    s_sweep = instances["mask-sweep"]
    n = s_sweep.n
    sweep_table = block_sse_table(s_sweep)
    crit_sum = CriticalPolicy.chi_square_by_equalities(0.05).critical_values(n)
    # a mid-table threshold keeps the max sweep's accept/reject mix honest
    crit_max = np.full(n, np.median(sweep_table[sweep_table > 0]))

    def raw_sweep(agg, crit):
        # fresh endpoint arrays every call: the kernel updates them in place
        smin = np.arange(n, dtype=np.int64)
        emax = np.arange(n, dtype=np.int64)
        kernels.masks_union(sweep_table, agg, crit, smin, emax, 0)

    s_fill = instances["contribution-fill"]
    _, lower = build_affine_bounds(s_fill.n, 0.05)
    fill_table = block_sse_table(s_fill)
    return {
        "mask-sweep-sum": lambda: raw_sweep(kernels.AGG_SUM, crit_sum),
        "mask-sweep-max": lambda: raw_sweep(kernels.AGG_MAX, crit_max),
        "all-partitions": lambda: ci_all_partitions(instances["all-partitions"]),
        "contribution-fill": lambda: min_contrib_matrix(s_fill, lower, fill_table),
    }


def run_benchmarks(args):
    from rankci.kernels import BACKEND

    results = {"backend": BACKEND, "timings": {}}
    funcs = workloads(build_instances(args))
    for name, func in funcs.items():
        func()  # warm caches (quantiles, partition tables) outside the clock
        best = float("inf")
        for _ in range(args.repeats):
            start = time.perf_counter()
            func()
            best = min(best, time.perf_counter() - start)
        results["timings"][name] = best
    return results


def print_table(results):
    print(f"backend: {results['backend']}")
    for name, seconds in results["timings"].items():
        print(f"  {name:<18} {seconds * 1000:10.3f} ms")


def compare(args):
    script = os.path.abspath(__file__)
    runs = {}
    for backend, extra_env in (("pure", {"RANKCI_PURE": "1"}), ("compiled", {})):
        env = {k: v for k, v in os.environ.items() if k != "RANKCI_PURE"}
        env.update(extra_env)
        cmd = [sys.executable, script, "--emit-json",
               "--repeats", str(args.repeats),
               "--sweep-n", str(args.sweep_n),
               "--partitions-n", str(args.partitions_n),
               "--fill-n", str(args.fill_n)]
        out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        runs[backend] = json.loads(out.stdout)
        if runs[backend]["backend"] != backend:
            raise RuntimeError(
                f"expected the {backend} backend, got {runs[backend]['backend']} "
                "(is the extension built?)"
            )
    print(f"{'workload':<18} {'pure':>12} {'compiled':>12} {'speedup':>9}")
    for name in runs["pure"]["timings"]:
        p = runs["pure"]["timings"][name]
        c = runs["compiled"]["timings"][name]
        print(f"{name:<18} {p * 1000:>9.3f} ms {c * 1000:>9.3f} ms {p / c:>8.1f}x")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--compare", action="store_true",
                        help="time both backends in subprocesses")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repetitions per workload (best is kept)")
    parser.add_argument("--sweep-n", type=int, default=14,
                        help="centers for the mask-sweep workloads")
    parser.add_argument("--partitions-n", type=int, default=7,
                        help="centers for the all-partition union")
    parser.add_argument("--fill-n", type=int, default=80,
                        help="centers for the contribution fill")
    parser.add_argument("--emit-json", action="store_true",
                        help="print raw timings as JSON (used by --compare)")
    args = parser.parse_args(argv)

    if args.compare:
        compare(args)
        return 0
    results = run_benchmarks(args)
    if args.emit_json:
        json.dump(results, sys.stdout)
        print()
    else:
        print_table(results)
    return 0


if __name__ == "__main__":
    sys.exit(main())
