#!/usr/bin/env python3
"""Compare the compiled scheduling kernels against the pure-Python fallback.

Two views: microbenchmarks of the three kernels on saturated workloads, and
an end-to-end simulation of the built-in cell under overload with each
backend active.  Run from the repository root:

    python3 benchmarks/bench_backends.py [--frames N]
"""

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from uplinksim import _backend  # noqa: E402
from uplinksim.config import baseline_config  # noqa: E402
from uplinksim.engine import SimMode, run  # noqa: E402


def kernel_workloads(seed=7):
    rng = random.Random(seed)
    dfpq = dict(
        sizes=[[rng.randint(64, 1250) for _ in range(40)] for _ in range(8)],
        full=[False] * 8,
        quanta=[1280] * 4 + [320] * 4,
        deficits=[0] * 8,
        cursor=0,
        budget=30_000,
    )
    edf = dict(
        deadlines=[sorted(rng.uniform(0, 200) for _ in range(12))
                   for _ in range(4)],
        arrivals=[sorted(rng.uniform(0, 100) for _ in range(12))
                  for _ in range(4)],
        sizes=[[rng.randint(100, 1250) for _ in range(12)] for _ in range(4)],
        cids=[1, 2, 3, 4],
        budget=20_000,
    )
    waterfill = dict(
        deficits=[rng.randint(0, 5000) for _ in range(16)],
        weights=[float(rng.choice([1, 2, 4])) for _ in range(16)],
        remaining=8320,
    )
    return dfpq, edf, waterfill


def time_call(fn, kwargs, repeats):
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(**kwargs)
    return (time.perf_counter() - t0) / repeats * 1e6  # microseconds


def main(argv=None):
    parser = argparse.ArgumentParser()
    parser.add_argument("--frames", type=int, default=4000,
                        help="frames for the end-to-end run (default 4000)")
    parser.add_argument("--repeats", type=int, default=20_000,
                        help="repeats per kernel microbenchmark")
    args = parser.parse_args(argv)

    names = _backend.available_backends()
    if "compiled" not in names:
        print("compiled kernels are not built; run "
              "`python3 setup.py build_ext --inplace` first")
        return 1

    dfpq, edf, waterfill = kernel_workloads()
    micro = {}
    for name in ("python", "compiled"):
        mod = _backend.get(name)
        micro[name] = (
            time_call(mod.dfpq_take, dfpq, args.repeats),
            time_call(mod.edf_take, edf, args.repeats),
            time_call(mod.waterfill, waterfill, args.repeats),
        )
    print("kernel microbenchmarks (saturated workloads, per call):")
    print(f"{'kernel':>12} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for k, label in enumerate(("dfpq_take", "edf_take", "waterfill")):
        py, cy = micro["python"][k], micro["compiled"][k]
        print(f"{label:>12} {py:>10.2f}us {cy:>10.2f}us {py / cy:>8.1f}x")

    cfg = baseline_config()
    print(f"\nend-to-end: built-in cell, ss1 mode, rho 1.2, "
          f"{args.frames} frames:")
    walls = {}
    active = _backend.backend_name()
    try:
        for name in ("python", "compiled"):
            _backend.use(name)
            t0 = time.perf_counter()
            run(cfg.scenario, SimMode.SS1, args.frames, seed=1, rho=1.2)
            walls[name] = time.perf_counter() - t0
            print(f"{name:>12} {walls[name]:>10.2f}s")
    finally:
        _backend.use(active)
    print(f"{'speedup':>12} {walls['python'] / walls['compiled']:>9.2f}x "
          "(traffic generation and bookkeeping stay in Python either way)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
