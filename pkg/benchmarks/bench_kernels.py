"""Benchmark the compiled kernel against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times the two hot operations at sizes representative of the desk-scale
ensemble forecast (members x floes x mode pairs) and of the truth run.
"""

import argparse
import time

import numpy as np

from floeda._kernels import numpy_backend
from floeda.ocean import ModeParams, build_mode_set, ou_step_factors

try:
    from floeda._kernels import _core

    BACKENDS = {"cython": _core, "numpy": numpy_backend}
except ImportError:
    BACKENDS = {"numpy": numpy_backend}


def bench_eval(impl, n_points, k_max, repeat):
    rng = np.random.default_rng(0)
    modes = build_mode_set(k_max)
    reps = (rng.normal(size=modes.n_pairs) + 1j * rng.normal(size=modes.n_pairs)) * 0.1
    pts = rng.uniform(0, 2 * np.pi, (n_points, 2))
    args = (reps, modes.rep_k[:, 0], modes.rep_k[:, 1],
            modes.rep_g[:, 0], modes.rep_g[:, 1], pts)
    impl.eval_point_velocity(*args)  # warm up
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        impl.eval_point_velocity(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_advance(impl, n_members, n_floes, k_max, n_steps, repeat):
    rng = np.random.default_rng(1)
    modes = build_mode_set(k_max)
    P = modes.n_pairs
    pos = rng.uniform(0, 2 * np.pi, (n_members, n_floes, 2))
    vel = rng.normal(0, 0.3, (n_members, n_floes, 2))
    reps = (rng.normal(size=(n_members, P)) + 1j * rng.normal(size=(n_members, P))) * 0.1
    aom = np.full(n_floes, 30.0)
    noise = (rng.standard_normal((n_members, n_steps, P))
             + 1j * rng.standard_normal((n_members, n_steps, P))) / np.sqrt(2)
    decay, forcing, nscale = ou_step_factors(ModeParams(d=0.5, sigma=0.13), P, 1e-3)
    best = np.inf
    for _ in range(repeat):
        p, v, r = pos.copy(), vel.copy(), reps.copy()
        t0 = time.perf_counter()
        impl.advance_system(p, v, r, aom, modes.rep_k[:, 0], modes.rep_k[:, 1],
                            modes.rep_g[:, 0], modes.rep_g[:, 1],
                            decay, forcing, nscale, noise, 1e-3, n_steps, False)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    cases_eval = [("eval 2000 pts, k_max=3", dict(n_points=2000, k_max=3)),
                  ("eval 2000 pts, k_max=9", dict(n_points=2000, k_max=9))]
    cases_adv = [("forecast 100x50 floes, k3, 10 steps",
                  dict(n_members=100, n_floes=50, k_max=3, n_steps=10)),
                 ("truth 1x2000 floes, k3, 10 steps",
                  dict(n_members=1, n_floes=2000, k_max=3, n_steps=10)),
                 ("forecast 100x50 floes, k9, 10 steps",
                  dict(n_members=100, n_floes=50, k_max=9, n_steps=10))]

    print(f"{'case':45s} " + " ".join(f"{name:>12s}" for name in BACKENDS))
    for label, kw in cases_eval:
        times = [bench_eval(impl, repeat=args.repeat, **kw) for impl in BACKENDS.values()]
        extra = f"  (x{times[-1] / times[0]:.1f})" if len(times) == 2 else ""
        print(f"{label:45s} " + " ".join(f"{t * 1e3:9.3f} ms" for t in times) + extra)
    for label, kw in cases_adv:
        times = [bench_advance(impl, repeat=args.repeat, **kw) for impl in BACKENDS.values()]
        extra = f"  (x{times[-1] / times[0]:.1f})" if len(times) == 2 else ""
        print(f"{label:45s} " + " ".join(f"{t * 1e3:9.3f} ms" for t in times) + extra)


if __name__ == "__main__":
    main()
