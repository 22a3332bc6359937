"""Fractional integral ``I^alpha f`` by Runge--Kutta convolution quadrature.

Three interchangeable evaluation modes share the same discretization:

``fast``
    certified weight quadrature plus the oblivious history (O(N_Q) memory);
``fft_reference``
    all weights from the generating function, O(N^2) direct sums;
``direct``
    weights from the adaptive real-line oracle, O(N^2) direct sums.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cq import WeightTable, direct_convolution, local_weights, weight_oracle_adaptive, weights_fft
from .fast_conv import HistoryState
from .rk import RKMethod, get_method
from .weight_quad import build_weight_rule, select_parameters

MODES = ("fast", "fft_reference", "direct")


@dataclass
class FracIntJob:
    f: Callable
    alpha: float
    h: float
    T: float
    method: str = "radau2"
    tol: float = 1e-6
    mode: str = "fast"
    n0: int = 5

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.h <= 0 or self.T <= 0:
            raise ValueError("h and T must be positive")

    @property
    def rk(self) -> RKMethod:
        return get_method(self.method)

    @property
    def N(self):
        # tolerate T/h landing a hair above an integer
        return int(math.ceil(self.T / self.h - 1e-9))

    def stage_times(self):
        """``t_{n,l} = (n + c_l) h`` for ``n < N``; shape ``(N, s)``."""
        return (np.arange(self.N)[:, None] + self.rk.c[None, :]) * self.h


@dataclass
class RunResult:
    t: np.ndarray
    u: np.ndarray
    n_nodes: int
    memory_bytes: int
    wall_time: float


def _fast(job, fs):
    m = job.rk
    params = select_parameters(m, job.alpha, job.h, job.N * job.h, job.n0, job.tol)
    rule = build_weight_rule(params)
    state = HistoryState(rule, m, local_weights(m, job.alpha, job.h, job.n0), job.n0)
    u = np.empty(job.N)
    for n in range(job.N):
        state.advance(fs[n])
        u[n] = state.evaluate()
    return u, len(rule), state.memory_bytes()


def _reference(job, fs):
    m = job.rk
    if job.mode == "fft_reference":
        table = weights_fft(m, job.alpha, job.h, job.N)
    else:
        omega = np.zeros((job.N + 1, m.s, m.s))
        omega[: job.n0 + 1] = local_weights(m, job.alpha, job.h, job.n0).W[: job.n0 + 1]
        for n in range(job.n0 + 1, job.N + 1):
            omega[n] = weight_oracle_adaptive(m, job.alpha, job.h, n, matrix=True)
        table = WeightTable(omega, job.h, job.alpha, m)
    u = direct_convolution(table, fs)
    # stored weight rows plus the full payload history
    mem = 8 * m.s * (len(table) + job.N)
    return u, 0, mem


def run(job: FracIntJob) -> RunResult:
    """Approximations ``u_n ~ I^alpha f (t_n)`` for ``n = 0..N`` (``u_0 = 0``)."""
    fs = job_f_samples(job)
    if not np.all(np.isfinite(fs)):
        raise FloatingPointError("f returned non-finite samples")
    t0 = time.perf_counter()
    u, nq, mem = _fast(job, fs) if job.mode == "fast" else _reference(job, fs)
    wall = time.perf_counter() - t0
    t = job.h * np.arange(job.N + 1)
    return RunResult(t, np.concatenate([[0.0], u]), nq, mem, wall)


def profile(job: FracIntJob):
    """``(wall_time, history_memory_bytes, N_Q)`` of one run."""
    res = run(job)
    return res.wall_time, res.memory_bytes, res.n_nodes


def convergence_table(job: FracIntJob, steps, exact=None, *, floor=None):
    """Rows ``(h, max_error, observed_order, at_floor)`` over a list of step sizes.

    Errors are taken against ``exact(t)`` when given, else against a run
    with ``h_min / 4``.  Reference grids must nest, which holds for the usual
    dyadic step lists.  ``at_floor`` marks rows whose error is below
    ``floor``, where halving ``h`` cannot help.  In fast mode the default
    floor is the certified deviation from the exact weights,
    ``tol * sum_j |f_j|``, computed per row; otherwise it is zero.
    """
    steps = sorted(steps, reverse=True)
    if len(steps) < 2:
        raise ValueError("need at least two step sizes")
    ref = None
    if exact is None:
        h_ref = steps[-1] / 4
        ref = run(_with_h(job, h_ref))
    rows = []
    prev = None
    for h in steps:
        res = run(_with_h(job, h))
        if exact is not None:
            err = np.max(np.abs(res.u - exact(res.t)))
        else:
            stride = int(round(h / ref_h(ref)))
            err = np.max(np.abs(res.u - ref.u[::stride][: len(res.u)]))
        order = math.log2(prev[1] / err) / math.log2(prev[0] / h) if prev and err > 0 else math.nan
        if floor is not None:
            row_floor = floor
        elif job.mode == "fast":
            row_floor = job.tol * float(np.abs(job_f_samples(_with_h(job, h))).sum())
        else:
            row_floor = 0.0
        rows.append((h, err, order, bool(err < row_floor)))
        prev = (h, err)
    return rows


def job_f_samples(job: FracIntJob):
    return np.asarray(job.f(job.stage_times()), dtype=float)


def ref_h(res: RunResult):
    return res.t[1] - res.t[0]


def _with_h(job, h):
    return FracIntJob(job.f, job.alpha, h, job.T, job.method, job.tol, job.mode, job.n0)


def exact_power(k, alpha):
    """``I^alpha t^k = Gamma(k+1)/Gamma(k+1+alpha) t^(k+alpha)``."""
    c = math.gamma(k + 1) / math.gamma(k + 1 + alpha)
    return lambda t: c * np.asarray(t, dtype=float) ** (k + alpha)
