"""Weight errors ||omega~_n - omega_n||_2 against n for 2-stage Radau IIA.

alpha = 0.5, h = 1e-2, T = 5, n0 = 5.  The tol = 1e-6 rule is checked against
the FFT weights, the tol = 1e-10 rule against the adaptive real-line oracle.
"""
import argparse
import sys

import numpy as np

from fastcq.cq import weight_oracle_adaptive, weights_fft
from fastcq.rk import get_method
from fastcq.weight_quad import build_weight_rule, select_parameters, weights_from_rule


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--method", default="radau2")
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--h", type=float, default=1e-2)
    ap.add_argument("--T", type=float, default=5.0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    m, n0 = get_method(args.method), 5
    N = int(round(args.T / args.h))
    ns = np.arange(n0 + 1, N + 1)
    fft = weights_fft(m, args.alpha, args.h, N).omega[ns]
    adaptive = np.array([weight_oracle_adaptive(m, args.alpha, args.h, n) for n in ns])
    cols = []
    for tol, ref in ((1e-6, fft), (1e-10, adaptive)):
        rule = build_weight_rule(select_parameters(m, args.alpha, args.h, args.T, n0, tol))
        cols.append(np.linalg.norm(weights_from_rule(rule, m, ns) - ref, axis=1))
    data = np.column_stack([ns, *cols])
    out = sys.stdout if args.out == "-" else args.out
    np.savetxt(out, data, fmt=["%d", "%.16e", "%.16e"], delimiter=",",
               header="n,error_tol_1e-6,error_tol_1e-10", comments="")


if __name__ == "__main__":
    main()
