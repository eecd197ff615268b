"""Benchmark the compiled kernel core against the numpy fallback.

Runs the polar-kernel batch primitive on three workload shapes and one
end-to-end gamma evaluation per backend, reporting times and the worst
relative deviation between the two implementations.

Usage: python benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time

import numpy as np

import opineq.kernels as kernels


def bench_polar(fn, p, w, um1, eta, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        vals, errs, nev = fn(p, w, 0, um1, eta, 1e-11)
        best = min(best, time.perf_counter() - t0)
    return best, vals, nev


def gamma_subprocess(pure: bool) -> float:
    env = {"OPINEQ_PURE_PYTHON": "1"} if pure else {}
    code = ("import time, opineq.kernels as K\n"
            "from opineq.anticomm import gamma\n"
            "t0 = time.perf_counter()\n"
            "g = gamma(3.0, 1e-10)\n"
            "print(K.backend_name, time.perf_counter() - t0, g.value)\n")
    out = subprocess.run([sys.executable, "-c", code],
                         env={**os.environ, **env},
                         capture_output=True, text=True, check=True)
    name, secs, value = out.stdout.split()
    return name, float(secs), float(value)


def main():
    backends = kernels.available_backends()
    if len(backends) < 2:
        print("only the %r backend is available; build the extension to compare"
              % kernels.backend_name)

    workloads = [
        ("small batch, near-singular   (n=64)",
         1.5, 0.0, np.geomspace(1e-12, 1e-2, 64), np.zeros(64)),
        ("medium batch, regularized    (n=2000)",
         1.5, 0.0, np.geomspace(1e-8, 1e3, 2000), np.full(2000, 1e-4)),
        ("large batch, band-weight mix (n=50000)",
         1.5, 0.0, np.geomspace(1e-10, 1e5, 50000), np.zeros(50000)),
        ("fractional weight d=1.5      (n=1000)",
         1.25, -0.5, np.geomspace(1e-8, 1e2, 1000), np.zeros(1000)),
    ]
    print("%-42s %12s %12s %10s" % ("workload", "cython [s]", "python [s]",
                                    "max rel dev"))
    for label, p, w, um1, eta in workloads:
        results = {}
        times = {}
        for name, fn in backends.items():
            times[name], results[name], _ = bench_polar(fn, p, w, um1, eta)
        if len(results) == 2:
            a, b = results["cython"], results["python"]
            dev = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
            print("%-42s %12.4f %12.4f %10.1e"
                  % (label, times["cython"], times["python"], dev))
        else:
            only = next(iter(times))
            print("%-42s %12s %12s" % (label, "%s: %.4f" % (only, times[only]), "-"))

    print("\nend-to-end gamma(3) at tol 1e-10, fresh subprocess per backend:")
    for pure in (False, True):
        name, secs, value = gamma_subprocess(pure)
        print("  %-8s %8.3f s   gamma = %.12f" % (name, secs, value))


if __name__ == "__main__":
    main()
