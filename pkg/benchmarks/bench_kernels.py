"""Numba kernels against their numpy counterparts, plus an end-to-end comparison.

Run:  python3 benchmarks/bench_kernels.py [--repeat N]

The end-to-end section re-runs the planner in a subprocess with
GDFT_DISABLE_NUMBA=1, since the kernel choice is fixed at import time.
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from gdft import _kernels


def _time(fn, *args, repeat: int) -> float:
    fn(*args)  # warm up (and compile)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best * 1e6


def bench_kernels(repeat: int) -> None:
    if not _kernels.NUMBA:
        print("numba not importable; only the numpy kernels exist")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':16s} {'shape':>16s} {'numpy us':>10s} {'numba us':>10s} {'speedup':>8s}")
    for n, d in [(60, 1), (120, 4), (512, 1), (120, 6)]:
        mats = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
        coeffs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        M = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        for name, args in [("dft_accumulate", (coeffs, mats)), ("trace_products", (mats, M))]:
            a = _time(_kernels.NUMPY[name], *args, repeat=repeat)
            b = _time(_kernels.NUMBA[name], *args, repeat=repeat)
            print(f"{name:16s} {str((n, d, d)):>16s} {a:10.1f} {b:10.1f} {a / b:8.2f}")
    for size, k in [(400, 2000), (4000, 20000)]:
        idx = rng.integers(0, size, k)
        vals = rng.standard_normal(k) + 0j
        a = _time(_kernels.NUMPY["scatter_add"], np.zeros(size, complex), idx, vals, repeat=repeat)
        b = _time(_kernels.NUMBA["scatter_add"], np.zeros(size, complex), idx, vals, repeat=repeat)
        print(f"{'scatter_add':16s} {str((size, k)):>16s} {a:10.1f} {b:10.1f} {a / b:8.2f}")


_E2E = """
import time, numpy as np
from gdft import group_from_spec, make_plan, execute_plan, naive_dft, compute_irreps
from gdft._kernels import USING_NUMBA
for spec in ["cyclic:512", "dihedral:64", "sl2:5", "cyclic:2*alternating:5"]:
    G = group_from_spec(spec)
    plan = make_plan(G)
    irr = compute_irreps(G)
    a = np.random.default_rng(0).standard_normal(G.order) + 0j
    execute_plan(plan, a); naive_dft(a, irr)
    t0 = time.perf_counter()
    for _ in range(5):
        execute_plan(plan, a)
    tp = (time.perf_counter() - t0) / 5
    t0 = time.perf_counter()
    for _ in range(5):
        naive_dft(a, irr)
    tn = (time.perf_counter() - t0) / 5
    print(f"{'numba' if USING_NUMBA else 'numpy':6s} {spec:24s} planner {tp * 1e3:8.2f} ms  naive {tn * 1e3:8.2f} ms")
"""


def bench_end_to_end() -> None:
    for flag in ("0", "1"):
        env = dict(os.environ, GDFT_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", _E2E], env=env, capture_output=True, text=True)
        sys.stdout.write(out.stdout or out.stderr)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args()
    bench_kernels(args.repeat)
    if not args.skip_e2e:
        bench_end_to_end()
