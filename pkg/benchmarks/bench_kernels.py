"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the two hot loops (simplex-constrained feasibility solves and
classical-capacity alternating maximization) on workloads shaped like the
containment scans and capacity sweeps the package performs, and prints a
timing table.  The numba path is what you get by default; set
QICHAN_PURE_NUMPY=1 to force the fallback in normal use.

Usage:  python benchmarks/bench_kernels.py [--batches N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qichan import kernels
from qichan.catalog import shrinking_channel, sic_tetrahedron
from qichan.channels import apply_dual
from qichan.decoherence import _coordinates
from qichan.rand import generator, random_effect, random_stochastic


def _feasibility_workload(n_problems: int):
    rng = generator(7)
    gamma = sic_tetrahedron()
    chan = shrinking_channel(1.0 / 3.0)
    g = _coordinates(gamma.effects).T
    targets = np.empty((n_problems, 2, 4))
    for s in range(n_problems):
        eff = apply_dual(chan, random_effect(rng, 2))
        targets[s, 0] = _coordinates([eff])[0]
        targets[s, 1] = _coordinates([np.eye(2, dtype=complex) - eff])[0]
    return g, targets


def _ba_workload(n_channels: int):
    rng = generator(11)
    return [random_stochastic(rng, 8, 8).T.copy() for _ in range(n_channels)]


def _time(fn, *args, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--batches", type=int, default=2000,
                        help="feasibility problems per run (default 2000)")
    parser.add_argument("--channels", type=int, default=200,
                        help="capacity solves per run (default 200)")
    args = parser.parse_args()

    g, targets = _feasibility_workload(args.batches)
    pyx_list = _ba_workload(args.channels)

    rows = []
    if kernels.NUMBA_AVAILABLE:
        # compile before timing
        kernels.solve_product_simplex_lsq_numba(g, targets[:2])
        kernels.blahut_arimoto_numba(pyx_list[0])
        t_feas_nb = _time(kernels.solve_product_simplex_lsq_numba, g, targets)
        t_ba_nb = _time(lambda: [kernels.blahut_arimoto_numba(p) for p in pyx_list])
        rows.append(("numba", t_feas_nb, t_ba_nb))
    else:
        print("numba unavailable or disabled; only the numpy path is timed")

    t_feas_np = _time(kernels.solve_product_simplex_lsq_numpy, g, targets)
    t_ba_np = _time(lambda: [kernels.blahut_arimoto_numpy(p) for p in pyx_list])
    rows.append(("numpy", t_feas_np, t_ba_np))

    p_nb, _ = (
        kernels.solve_product_simplex_lsq_numba(g, targets)
        if kernels.NUMBA_AVAILABLE
        else (None, None)
    )
    p_np, _ = kernels.solve_product_simplex_lsq_numpy(g, targets)

    print(f"\nactive backend: {kernels.BACKEND}")
    print(f"{'backend':8s}  {'feasibility ' + str(args.batches) + 'x':>22s}  "
          f"{'capacity ' + str(args.channels) + 'x':>18s}")
    for name, t_feas, t_ba in rows:
        print(f"{name:8s}  {t_feas:20.3f}s  {t_ba:16.3f}s")
    if len(rows) == 2:
        print(f"{'speedup':8s}  {rows[1][1] / rows[0][1]:20.1f}x  "
              f"{rows[1][2] / rows[0][2]:16.1f}x")
    if p_nb is not None:
        agree = np.abs(p_nb - p_np).max()
        print(f"\nbackend agreement (max |pi_numba - pi_numpy|): {agree:.2e}")


if __name__ == "__main__":
    main()
