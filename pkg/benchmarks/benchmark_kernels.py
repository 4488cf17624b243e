#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallbacks.

Runs each hot kernel under both backends in subprocesses (the backend is
frozen at import time) and prints a timing table.  Workloads match the
default acceptance grid so the numbers reflect real solver steps.

Usage: python3 benchmarks/benchmark_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, time
import numpy as np

import dvbgk
from dvbgk import GridConfig, MacroFields, build_grid, local_maxwellian
from dvbgk._kernels import spline_advect

def timeit(fn, repeat):
    fn()  # warm-up / JIT
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best

grid = build_grid(GridConfig())
rng = np.random.default_rng(0)
rho = 1.0 + 0.05 * np.sin(2 * np.pi * grid.x_axis)
mac = MacroFields(rho, np.zeros((grid.n_cells, 3)), np.ones(grid.n_cells))

cols = rng.standard_normal((grid.n_velocity, grid.config.spatial_points))
shifts = grid.V[:, 0] * 0.01 / grid.dx

repeat = int(json.loads(open(0).read())["repeat"])
out = {
    "backend": dvbgk.BACKEND,
    "newton_conservative_s": timeit(lambda: local_maxwellian(mac, grid, "conservative"), repeat),
    "spline_advect_s": timeit(lambda: spline_advect(cols, shifts), repeat),
}
print(json.dumps(out))
"""


def run_backend(backend, repeat):
    env = dict(os.environ, DVBGK_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-c", WORKER],
        input=json.dumps({"repeat": repeat}),
        capture_output=True,
        text=True,
        env=env,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"{backend} worker failed:\n{proc.stderr}")
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    results = {}
    for backend in ("numpy", "numba"):
        try:
            results[backend] = run_backend(backend, args.repeat)
        except RuntimeError as exc:
            print(f"skipping {backend}: {exc}")

    kernels = ["newton_conservative_s", "spline_advect_s"]
    print(f"{'kernel':28s} " + " ".join(f"{b:>12s}" for b in results) + "   speedup")
    for k in kernels:
        times = [results[b][k] for b in results]
        ratio = times[0] / times[-1] if len(times) == 2 and times[-1] > 0 else float("nan")
        row = " ".join(f"{t * 1e3:9.2f} ms" for t in times)
        print(f"{k:28s} {row}   {ratio:6.2f}x")


if __name__ == "__main__":
    main()
