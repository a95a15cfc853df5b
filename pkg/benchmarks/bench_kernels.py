"""Benchmark the hot kernels: numba backend against the pure-Python fallback.

Runs the three kernel-bound workloads (per-execution predicate masks, the
single-order permutation scan, and the exhaustive small-history sweep) in two
subprocesses, one per backend, and prints a comparison table.  The backends
must agree bit for bit; this script also spot-checks that while timing.

Usage: python benchmarks/bench_kernels.py [--scale small|full]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

WORKER = r"""
import json
import random
import sys
import time

from conchk import kernels
from conchk.checker import _space, check_history
from conchk.hierarchy import GeneratorConfig, random_history
from conchk.oracle import oracle_small_space_verdicts

scale = sys.argv[1]
results = {"backend": kernels.BACKEND}

# workload 1: predicate masks over random executions
rng = random.Random(0)
cases = []
for _ in range(300):
    h = random_history(GeneratorConfig(ops=6), rng)
    sp = _space(h)
    ids = list(h.ids)
    rng.shuffle(ids)
    arpos = [0] * sp.n
    for k, x in enumerate(ids):
        arpos[sp.index_of[x]] = k
    vis = 0
    for a in range(sp.n):
        for b in range(sp.n):
            if a != b and arpos[a] < arpos[b] and rng.random() < 0.4:
                vis |= 1 << (sp.st * a + b)
    cases.append((sp.packed, vis, arpos))
reps = 40 if scale == "full" else 8
t0 = time.time()
acc = 0
for _ in range(reps):
    for packed, vis, arpos in cases:
        acc ^= kernels.pred_mask_for(packed, vis, arpos)
results["pred_mask"] = {"seconds": time.time() - t0, "evals": reps * len(cases), "check": acc}

# workload 2: single-order scans (checker hot path)
rng = random.Random(1)
hist = [random_history(GeneratorConfig(ops=7, read_fraction=0.6), rng) for _ in range(100)]
reps = 6 if scale == "full" else 2
t0 = time.time()
sats = 0
for _ in range(reps):
    for h in hist:
        h._space = None if False else getattr(h, "_space", None)
        sats += check_history(h, "linearizability").satisfied
results["so_scan"] = {"seconds": time.time() - t0, "checks": reps * len(hist), "check": sats}

# workload 3: exhaustive small-history sweep (oracle hot path)
max_ops = 4 if scale == "full" else 3
t0 = time.time()
count = 0
acc = 0
for _pattern, _attrs, satmask in oracle_small_space_verdicts(max_ops=max_ops):
    count += 1
    acc ^= satmask
results["sweep"] = {"seconds": time.time() - t0, "histories": count, "check": acc}

print(json.dumps(results))
"""


def run_backend(env_value, scale):
    env = dict(os.environ, CONCHK_NUMBA=env_value)
    out = subprocess.run(
        [sys.executable, "-c", WORKER, scale],
        capture_output=True,
        text=True,
        env=env,
    )
    if out.returncode != 0:
        raise RuntimeError(out.stderr)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scale", choices=("small", "full"), default="small",
                        help="full runs the n<=4 sweep on both backends (slow in fallback)")
    args = parser.parse_args()

    numba_res = run_backend("1", args.scale)
    python_res = run_backend("0", args.scale)
    assert numba_res["backend"] == "numba", "numba backend unavailable"
    assert python_res["backend"] == "python"

    print(f"{'workload':<12} {'unit':<10} {'numba':>12} {'python':>12} {'speedup':>9}")
    for key, unit in (("pred_mask", "evals"), ("so_scan", "checks"), ("sweep", "histories")):
        a, b = numba_res[key], python_res[key]
        if a["check"] != b["check"]:
            raise SystemExit(f"backend results disagree on {key}!")
        ra = a[unit] / a["seconds"]
        rb = b[unit] / b["seconds"]
        print(
            f"{key:<12} {unit + '/s':<10} {ra:>12.0f} {rb:>12.0f} {ra / rb:>8.1f}x"
        )
    print("results identical across backends")


if __name__ == "__main__":
    main()
