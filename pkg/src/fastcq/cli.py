"""Command-line driver emitting CSV tables.

    fastcq quadparams --method radau2 --alpha 0.5 --h 1e-2,1e-3 --T 10,100
    fastcq weights    --method radau2 --alpha 0.5 --h 1e-2 --T 5 --tol 1e-6
    fastcq fracint    --method radau2 --alpha 0.25 --T 128 --h 8,4,2,1
    fastcq fde        --beta 0.5 --M 2000 --N 32,64,128,256

Every option may also come from ``--config FILE`` holding ``key = value``
lines (``#`` starts a comment); command-line flags take precedence.  Numeric
options that accept a sweep take comma-separated lists.

Exit status: 0 on success, 2 on a configuration error, 3 on a numerical
failure.
"""
from __future__ import annotations

import argparse
import io
import math
import sys

import numpy as np

from .cq import weight_oracle_adaptive, weights_fft
from .fde import FDEProblem, fde_solve, manufactured
from .frac_integral import FracIntJob, exact_power, run
from .rk import METHOD_NAMES, get_method
from .weight_quad import TOL_MIN, build_weight_rule, select_parameters, weights_from_rule

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(Exception):
    pass


def _floats(text, name):
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ConfigError(f"{name}: empty list")
    return vals


def _ints(text, name):
    vals = _floats(text, name)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"{name}: expected integers, got {text!r}")
    return [int(v) for v in vals]


def _one(text, name, kind=float):
    vals = _floats(text, name)
    if len(vals) != 1:
        raise ConfigError(f"{name}: expected a single value")
    return kind(vals[0]) if kind is float else _ints(text, name)[0]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.16e" % v


def _write_csv(out, header, rows):
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")


# subcommand -> {option: default}; None means required
OPTIONS = {
    "quadparams": {"method": "radau2", "alpha": "0.5", "h": None, "T": None, "n0": "5",
                   "tol": "1e-6"},
    "weights": {"method": "radau2", "alpha": "0.5", "h": "1e-2", "T": "5", "n0": "5",
                "tol": "1e-6", "oracle": "auto"},
    "fracint": {"method": "radau2", "alpha": "0.25", "h": "8,4,2,1,0.5,0.25", "T": "128",
                "n0": "5", "tol": "1e-6", "f": "t3exp", "timing": "0"},
    "fde": {"method": "radau2", "beta": "0.5", "M": "2000", "N": "32,64,128,256", "T": "1",
            "n0": "5", "tol": "1e-10", "f": "manufactured"},
}


def read_config(path):
    cfg = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        cfg[key.lstrip("-")] = val
    return cfg


def build_parser():
    p = argparse.ArgumentParser(prog="fastcq", description="Fast Runge-Kutta convolution quadrature")
    sub = p.add_subparsers(dest="command", required=True)
    for name, opts in OPTIONS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key=value file; flags win")
        sp.add_argument("--out", help="output CSV path (default stdout)")
        for key, default in opts.items():
            kw = {"choices": METHOD_NAMES} if key == "method" else {}
            note = "required" if default is None else f"default {default}"
            sp.add_argument(f"--{key}", default=None, help=note, **kw)
    return p


def resolve(args):
    """Merge defaults, config file and flags (in increasing precedence)."""
    opts = OPTIONS[args.command]
    merged = {k: v for k, v in opts.items()}
    if args.config:
        cfg = read_config(args.config)
        unknown = set(cfg) - set(opts) - {"out"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(cfg)
    out = merged.pop("out", None) if args.out is None else args.out
    merged.pop("out", None)
    for k in opts:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    missing = [k for k, v in merged.items() if v is None]
    if missing:
        raise ConfigError(f"missing required options: {missing}")
    if merged.get("method") not in METHOD_NAMES:
        raise ConfigError(f"method must be one of {METHOD_NAMES}")
    return merged, out


def _check(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _check_tol(*tols):
    _check(all(t >= TOL_MIN for t in tols), f"tol must be >= {TOL_MIN:g}")


def cmd_quadparams(o):
    method = get_method(o["method"])
    n0 = _one(o["n0"], "n0", int)
    hs, Ts = _floats(o["h"], "h"), _floats(o["T"], "T")
    alphas, tols = _floats(o["alpha"], "alpha"), _floats(o["tol"], "tol")
    _check(n0 >= 1, "n0 must be >= 1")
    _check(all(0 < a < 1 for a in alphas), "alpha must lie in (0, 1)")
    _check(all(t > 0 for t in tols + hs + Ts), "h, T and tol must be positive")
    _check(all(T >= (n0 + 1) * h for T in Ts for h in hs), "T must be >= (n0 + 1) h")
    _check_tol(*tols)
    header = ["method", "h", "T", "alpha", "tol", "N_Q", "A_trunc", "J", "B", "Q0", "Qj"]
    rows = []
    for tol in tols:
        for alpha in alphas:
            for h in hs:
                for T in Ts:
                    p = select_parameters(method, alpha, h, T, n0, tol)
                    rows.append([method.name, h, T, alpha, tol, p.n_nodes, p.A_trunc, p.J, p.B,
                                 p.Q0, ";".join(str(q) for q in p.Qj)])
    return header, rows


def cmd_weights(o):
    method = get_method(o["method"])
    alpha, h, T = _one(o["alpha"], "alpha"), _one(o["h"], "h"), _one(o["T"], "T")
    tol, n0 = _one(o["tol"], "tol"), _one(o["n0"], "n0", int)
    _check(0 < alpha < 1, "alpha must lie in (0, 1)")
    _check(h > 0 and tol > 0 and n0 >= 1, "h, tol must be positive and n0 >= 1")
    _check(T >= (n0 + 1) * h, "T must be >= (n0 + 1) h")
    _check_tol(tol)
    oracle = o["oracle"]
    _check(oracle in ("auto", "fft", "adaptive"), "oracle must be auto, fft or adaptive")
    if oracle == "auto":
        oracle = "fft" if tol >= 1e-8 else "adaptive"
    N = int(math.floor(T / h + 1e-9))
    rule = build_weight_rule(select_parameters(method, alpha, h, T, n0, tol))
    ns = np.arange(n0 + 1, N + 1)
    approx = weights_from_rule(rule, method, ns)
    if oracle == "fft":
        ref = weights_fft(method, alpha, h, N).omega[n0 + 1:]
    else:
        ref = np.array([weight_oracle_adaptive(method, alpha, h, int(n)) for n in ns])
    err = np.linalg.norm(approx - ref, axis=1)
    return ["n", "error"], [[int(n), e] for n, e in zip(ns, err)]


_FRACINT_F = {
    "t3exp": (lambda t: t**3 * np.exp(-t), None),
    "t3": (lambda t: t**3, lambda a: exact_power(3, a)),
    "zero": (lambda t: np.zeros_like(t), lambda a: (lambda t: np.zeros_like(t))),
}


def cmd_fracint(o):
    alpha, T, tol = _one(o["alpha"], "alpha"), _one(o["T"], "T"), _one(o["tol"], "tol")
    n0 = _one(o["n0"], "n0", int)
    hs = sorted(_floats(o["h"], "h"), reverse=True)
    _check(0 < alpha < 1, "alpha must lie in (0, 1)")
    _check(tol > 0 and all(h > 0 for h in hs), "h and tol must be positive")
    _check(o["f"] in _FRACINT_F, f"f must be one of {sorted(_FRACINT_F)}")
    _check(T >= (n0 + 1) * hs[0], "T must be >= (n0 + 1) h for every h")
    _check_tol(tol)
    timing = o["timing"].strip().lower() in ("1", "true", "yes")
    f, exact_for = _FRACINT_F[o["f"]]
    method = o["method"]
    job = lambda h, mode: FracIntJob(f, alpha, h, T, method, tol, mode, n0)
    if exact_for is None:
        h_ref = hs[-1] / 4
        ref = run(job(h_ref, "fft_reference"))
    header = ["h", "max_error", "order", "time_fast", "time_ref", "mem_fast", "mem_ref"]
    rows, prev = [], None
    for h in hs:
        fast, std = run(job(h, "fast")), run(job(h, "fft_reference"))
        if exact_for is not None:
            target = exact_for(alpha)(fast.t)
        else:
            stride = int(round(h / h_ref))
            _check(abs(stride * h_ref - h) < 1e-12 * h, "step sizes must nest (powers of two apart)")
            target = ref.u[::stride][: len(fast.u)]
        err = float(np.max(np.abs(fast.u - target)))
        order = (math.log(prev[1] / err) / math.log(prev[0] / h)
                 if prev and err > 0 and prev[1] > 0 else math.nan)
        tf, tr = (fast.wall_time, std.wall_time) if timing else (math.nan, math.nan)
        rows.append([h, err, order, tf, tr, fast.memory_bytes, std.memory_bytes])
        prev = (h, err)
    return header, rows


def cmd_fde(o):
    beta, T, tol = _one(o["beta"], "beta"), _one(o["T"], "T"), _one(o["tol"], "tol")
    M, n0 = _one(o["M"], "M", int), _one(o["n0"], "n0", int)
    Ns = _ints(o["N"], "N")
    _check(0 < beta < 1, "beta must lie in (0, 1)")
    _check(M >= 2 and all(N >= 1 for N in Ns), "need M >= 2 and N >= 1")
    _check(T > 0 and tol > 0, "T and tol must be positive")
    _check_tol(tol)
    _check(all(T >= (n0 + 1) * T / N for N in Ns), "N must exceed n0")
    _check(o["f"] in ("manufactured", "zero"), "f must be manufactured or zero")
    if o["f"] == "manufactured":
        exact, f = manufactured(beta)
    else:
        exact = lambda x, t: np.zeros_like(np.asarray(x, dtype=float))
        f = lambda x, t: np.zeros(np.broadcast(x, t).shape)
    header = ["N", "h", "dx", "L2_error", "memory_bytes", "N_Q"]
    rows = []
    for N in Ns:
        prob = FDEProblem(beta, M, f, T=T, N=N, method=o["method"], tol=tol, n0=n0)
        res = fde_solve(prob)
        e = res.u[-1] - exact(res.fem.x, T)
        err = math.sqrt(max(float(e @ res.fem.mass_apply(e)), 0.0))
        rows.append([N, prob.h, res.fem.dx, err, res.memory_bytes, res.n_nodes])
    return header, rows


COMMANDS = {"quadparams": cmd_quadparams, "weights": cmd_weights, "fracint": cmd_fracint,
            "fde": cmd_fde}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    try:
        opts, out_path = resolve(args)
        header, rows = COMMANDS[args.command](opts)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    buf = io.StringIO()
    _write_csv(buf, header, rows)
    if out_path:
        try:
            with open(out_path, "w") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            print(f"config error: cannot write output: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
