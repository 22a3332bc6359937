"""Fractional integral of t^3 exp(-t), alpha = 1/4, 2-stage Radau IIA, T = 128.

Part 1: convergence of the standard (FFT) implementation for h = 2^(3-j).
Part 2: fast against standard at tol = 1e-6 with wall time and history memory.
"""
import argparse
import sys

import numpy as np

from fastcq.frac_integral import FracIntJob, convergence_table, run


def f(t):
    return t**3 * np.exp(-t)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--jmax", type=int, default=7)
    ap.add_argument("--T", type=float, default=128.0)
    ap.add_argument("--tol", type=float, default=1e-6)
    args = ap.parse_args()
    steps = [2.0 ** (3 - j) for j in range(args.jmax + 1)]

    job = FracIntJob(f, 0.25, steps[0], args.T, "radau2", mode="fft_reference")
    print("h,max_error,order,reference_curve")
    for h, err, order, _ in convergence_table(job, steps):
        curve = 10**-2.5 * (h**3 + abs(np.log(h)) * h**3.25)
        print(f"{h:.16e},{err:.16e},{order:.16e},{curve:.16e}")

    print()
    print("h,N,max_fast_vs_standard,time_fast,time_standard,mem_fast,mem_standard,N_Q")
    for h in steps[2:]:
        base = dict(f=f, alpha=0.25, h=h, T=args.T, method="radau2", tol=args.tol)
        fast = run(FracIntJob(mode="fast", **base))
        std = run(FracIntJob(mode="fft_reference", **base))
        diff = np.max(np.abs(fast.u - std.u))
        print(f"{h:.16e},{len(fast.u) - 1},{diff:.16e},{fast.wall_time:.4e},{std.wall_time:.4e},"
              f"{fast.memory_bytes},{std.memory_bytes},{fast.n_nodes}")
    sys.stdout.flush()


if __name__ == "__main__":
    main()
