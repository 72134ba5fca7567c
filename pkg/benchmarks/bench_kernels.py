"""Time the two root-tracking backends on identical workloads.

Runs the numba-compiled tracker against the vectorized numpy one on
(a) a synthetic degree-6 fiber over a long spiral path and (b) the
degree-2 fiber of a genus-2 hyperelliptic model over pair-loop circles,
then prints per-workload timings and the worst root disagreement.
K2REG_PURE_NUMPY only changes which backend the package uses by
default; both implementations are importable side by side, which is
what this script relies on.

Usage: python benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from k2reg import _kernels
from k2reg.models import HyperModel
from k2reg.numpoly import poly_roots


def synthetic_workload(n_samples):
    rng = np.random.default_rng(7)
    coeffs = rng.normal(size=(9, 7)) + 1j * rng.normal(size=(9, 7))
    coeffs[0, 6] += 4.0
    ts = np.linspace(0.0, 1.0, n_samples)
    u_path = 0.8 * np.exp(2j * np.pi * ts) * (1.0 + 0.1 * ts)
    c0 = np.array([np.polyval(coeffs[::-1, k], u_path[0]).item()
                   for k in range(7)])
    roots0 = poly_roots(c0)
    return coeffs.astype(np.complex128), u_path.astype(np.complex128), roots0


def model_workload(n_samples):
    model = HyperModel(2, 2, (1, 2))
    bx = model.branch_x()
    center = (bx[0] + bx[1]) / 2.0
    radius = 0.8 * abs(bx[0] - bx[1])
    ts = np.linspace(0.0, 1.0, n_samples)
    u_path = center + radius * np.exp(2j * np.pi * ts)
    roots0 = model.y_roots(u_path[0])
    return model.fiber_grid(), u_path, roots0


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _kernels.track_roots_jit is None:
        raise SystemExit("numba backend unavailable; nothing to compare")

    workloads = [
        ("synthetic d=6", synthetic_workload(20000)),
        ("model fiber d=2", model_workload(200000)),
    ]
    print(f"{'workload':<18} {'samples':>8} {'numba ms':>10} "
          f"{'numpy ms':>10} {'speedup':>8} {'max |diff|':>11}")
    for name, (coeffs, u_path, roots0) in workloads:
        jit_args = (np.ascontiguousarray(coeffs),
                    np.ascontiguousarray(u_path),
                    np.ascontiguousarray(roots0),
                    _kernels._DK_TOL, _kernels._DK_MAX_ITER)
        # First call pays the compile; keep it out of the timing.
        _kernels.track_roots_jit(*jit_args)
        t_jit, (paths_jit, ok_jit, _) = best_of(
            lambda: _kernels.track_roots_jit(*jit_args), args.repeats)
        t_pure, (paths_pure, ok_pure, _) = best_of(
            lambda: _kernels.track_roots_pure(
                coeffs, u_path, roots0,
                _kernels._DK_TOL, _kernels._DK_MAX_ITER),
            args.repeats)
        if not (ok_jit and ok_pure):
            raise SystemExit(f"{name}: tracking failed; benchmark invalid")
        diff = np.abs(paths_jit - paths_pure).max()
        print(f"{name:<18} {u_path.size:>8} {1e3 * t_jit:>10.2f} "
              f"{1e3 * t_pure:>10.2f} {t_pure / t_jit:>8.2f} {diff:>11.2e}")


if __name__ == "__main__":
    main()
