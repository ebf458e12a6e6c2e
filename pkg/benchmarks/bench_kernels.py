"""Compare the compiled and the numpy finite-difference kernels.

Usage: python3 benchmarks/bench_kernels.py [--nodes 4000] [--repeat 20]

Prints the agreement of residuals/Jacobians and the time per assembly and per
full solve for both backends.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tt_toda import toda_solver as ts


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if ts.kernel_backend() != "cython":
        print("compiled kernel not built; only the numpy backend is available")
        return
    rng = np.random.default_rng(0)
    cases = [(2, [0.25, -0.25]), (4, [0.3, 0.1, -0.1, -0.3]), (8, [0.35, 0.25, 0.1, 0.05, -0.05, -0.1, -0.25, -0.35])]
    print(f"{'n+1':>4} {'n_eqs':>5} {'max|dF|':>10} {'max|dJ|':>10} {'py asm':>10} {'cy asm':>10} {'speedup':>8} {'py solve':>9} {'cy solve':>9}")
    for N1, m in cases:
        P = ts.assemble_tt_toda(N1, m, nodes=args.nodes)
        s = P.grid[:-1]
        lin = P.gamma[None, :] * (s[:, None] - P.s_max)
        vb = rng.normal(size=(s.size, P.n_eqs)) * 0.1
        vc = rng.normal(size=vb.shape) * 1e-17
        argv = (vb, vc, lin, s, P.h, P.a, P.b, P.alpha(), True, True)
        Fp, Jp = ts.assemble(*argv, backend="python")
        Fc, Jc = ts.assemble(*argv, backend="cython")
        dF = np.max(np.abs(Fp - Fc)) / np.max(np.abs(Fp))
        dJ = np.max(np.abs(Jp - Jc)) / np.max(np.abs(Jp))
        tp = _time(lambda: ts.assemble(*argv, backend="python"), args.repeat)
        tc = _time(lambda: ts.assemble(*argv, backend="cython"), args.repeat)
        sp = _time(lambda: ts.solve_bvp(P, ts.SolverOptions(backend="python")), 3)
        sc = _time(lambda: ts.solve_bvp(P, ts.SolverOptions(backend="cython")), 3)
        print(f"{N1:>4} {P.n_eqs:>5} {dF:>10.1e} {dJ:>10.1e} {tp*1e3:>8.2f}ms {tc*1e3:>8.2f}ms {tp/tc:>7.1f}x {sp:>8.3f}s {sc:>8.3f}s")


if __name__ == "__main__":
    main()
