"""Subdiffusion d_t^beta u - u_xx = f on (-1, 1), u = t^5 cos(pi x / 2).

One-dimensional analog of the error/memory table: L2 error at T = 1, ratio
of successive errors, history memory and node count, for the fast and the
direct (all weights stored) history.
"""
import argparse

from fastcq.fde import FDEProblem, fde_error_report, manufactured


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--M", type=int, default=2000)
    ap.add_argument("--method", default="radau2")
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--N", default="32,64,128,256")
    ap.add_argument("--direct", action="store_true", help="also run the direct history")
    args = ap.parse_args()
    exact, f = manufactured(args.beta)
    Ns = [int(v) for v in args.N.split(",")]
    print("history,N,L2_error,ratio,memory_bytes,N_Q")
    for history in ("fast", "direct") if args.direct else ("fast",):
        prev = None
        for N in Ns:
            prob = FDEProblem(args.beta, args.M, f, T=1.0, N=N, method=args.method, tol=args.tol,
                              history=history)
            err, mem, nq = fde_error_report(prob, exact)
            ratio = prev / err if prev else float("nan")
            print(f"{history},{N},{err:.16e},{ratio:.16e},{mem},{nq}")
            prev = err


if __name__ == "__main__":
    main()
