"""Acceptance criteria 1-8, one test each; every test prints one PASS/FAIL line."""
import math
import time

import mpmath as mp
import numpy as np
import pytest

from fastcq.cq import (WeightTable, bdf1_weights_analytic, direct_convolution, local_weights,
                       weight_oracle_adaptive, weights_fft)
from fastcq.fast_conv import HistoryState
from fastcq.fde import FDEProblem, fde_error_report, manufactured
from fastcq.frac_integral import FracIntJob, convergence_table, run
from fastcq.kernel_quad import build_kernel_rule
from fastcq.rk import METHOD_NAMES, get_method, matrix_frac_power
from fastcq.weight_quad import (build_weight_rule, select_parameters, weight_matrix_from_rule,
                                weights_from_rule)

from reference_counts import all_cells


def _report(name, ok, detail):
    print(f"{name} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_criterion_1_weight_accuracy():
    t0 = time.perf_counter()
    m, alpha, h, T, n0 = get_method("radau2"), 0.5, 1e-2, 5.0, 5
    N = int(round(T / h))
    ns = np.arange(n0 + 1, N + 1)
    errs = {}
    ref = weights_fft(m, alpha, h, N).omega[ns]
    rule = build_weight_rule(select_parameters(m, alpha, h, T, n0, 1e-6))
    errs[1e-6] = np.linalg.norm(weights_from_rule(rule, m, ns) - ref, axis=1).max()
    ref = np.array([weight_oracle_adaptive(m, alpha, h, n) for n in ns])
    rule = build_weight_rule(select_parameters(m, alpha, h, T, n0, 1e-10))
    errs[1e-10] = np.linalg.norm(weights_from_rule(rule, m, ns) - ref, axis=1).max()
    wall = time.perf_counter() - t0
    ok = all(e <= tol for tol, e in errs.items()) and wall < 10
    detail = ", ".join(f"tol={tol:g}: max err {e:.2e}" for tol, e in errs.items())
    _report("criterion 1 (weight accuracy)", ok, f"{detail}; {wall:.1f}s")


def test_criterion_2_node_counts():
    t0 = time.perf_counter()
    misses, total, worst = [], 0, 0
    for method, alpha, h, T, tol, expected in all_cells():
        got = select_parameters(get_method(method), alpha, h, T, 5, tol).n_nodes
        total += 1
        worst = max(worst, abs(got - expected))
        if abs(got - expected) > 5:
            misses.append((method, alpha, h, T, tol, expected, got))
    wall = time.perf_counter() - t0
    ok = not misses and wall < 60
    sample = "; ".join(f"{c[0]} a={c[1]} h={c[2]:g} T={c[3]} tol={c[4]:g}: {c[6]} vs {c[5]}"
                       for c in misses[:3])
    _report("criterion 2 (node counts)", ok,
            f"{total - len(misses)}/{total} cells within +-5, worst deviation {worst}, {wall:.1f}s"
            + (f"; e.g. {sample}" if misses else ""))


def _fitted_order(rows, last=3):
    hs = np.log([r[0] for r in rows[-(last + 1):]])
    es = np.log([r[1] for r in rows[-(last + 1):]])
    return np.polyfit(hs, es, 1)[0]


def test_criterion_3_scalar_convergence():
    t0 = time.perf_counter()
    f = lambda t: t**3 * np.exp(-t)
    job = FracIntJob(f, 0.25, 1.0, 128.0, "radau2", mode="fft_reference")
    steps = [2.0 ** (3 - j) for j in range(6)]
    rows = convergence_table(job, steps)
    order = _fitted_order(rows)
    wall = time.perf_counter() - t0
    errs = " ".join(f"{r[1]:.2e}" for r in rows)
    _report("criterion 3 (scalar convergence)", order >= 2.7 and wall < 120,
            f"fitted order {order:.2f} over h={steps[-4]:g}..{steps[-1]:g} (errors {errs}), {wall:.1f}s")


def test_criterion_4_fast_vs_standard():
    f = lambda t: t**3 * np.exp(-t)
    base = dict(f=f, alpha=0.25, h=0.25, T=128.0, method="radau2", tol=1e-6)
    fast = run(FracIntJob(mode="fast", **base))
    ref = run(FracIntJob(mode="fft_reference", **base))
    diff = np.max(np.abs(fast.u - ref.u))
    s, n0 = get_method("radau2").s, 5
    nq = fast.n_nodes
    # memory held after 10 steps and after all N steps is the same
    m = get_method("radau2")
    rule = build_weight_rule(select_parameters(m, 0.25, 0.25, 128.0, n0, 1e-6))
    st = HistoryState(rule, m, local_weights(m, 0.25, 0.25, n0), n0)
    fs = f(FracIntJob(**base).stage_times())
    mem_seen = set()
    for n in range(len(fs)):
        st.advance(fs[n])
        if n in (10, len(fs) // 2, len(fs) - 1):
            mem_seen.add(st.memory_bytes())
    ref_mems = [run(FracIntJob(mode="fft_reference", **dict(base, h=h))).memory_bytes
                for h in (1.0, 0.5, 0.25)]
    bound = (nq + n0 + 1) * s * 8
    ok = (diff <= 1e-6 and mem_seen == {fast.memory_bytes} and fast.memory_bytes <= bound
          and ref_mems[1] > 1.9 * ref_mems[0] and ref_mems[2] > 1.9 * ref_mems[1])
    _report("criterion 4 (fast vs standard)", ok,
            f"max diff {diff:.2e}; fast memory {fast.memory_bytes} B constant over steps "
            f"(N_Q={nq}, bound (N_Q+n0+1)*s*8={bound}); reference memory {ref_mems} B for N=128,256,512")


def test_criterion_5_oblivious_exactness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for name in METHOD_NAMES:
        m = get_method(name)
        for N in (32, 128, 512):
            alpha, h, n0 = 0.4, 0.05, 5
            rule = build_weight_rule(select_parameters(m, alpha, h, N * h, n0, 1e-8))
            local = local_weights(m, alpha, h, n0)
            W = np.concatenate([local.W[: n0 + 1],
                                weight_matrix_from_rule(rule, m, np.arange(n0 + 1, N + 1))])
            table = WeightTable(W, h, alpha, m)
            for _ in range(20):
                f = rng.standard_normal((N, m.s))
                ref = direct_convolution(table, f)
                st = HistoryState(rule, m, local, n0)
                got = np.empty(N)
                for n in range(N):
                    st.advance(f[n])
                    got[n] = st.evaluate()
                worst = max(worst, np.max(np.abs(got - ref)) / np.max(np.abs(ref)))
    wall = time.perf_counter() - t0
    _report("criterion 5 (oblivious exactness)", worst <= 1e-12 and wall < 30,
            f"max relative deviation {worst:.2e} over 180 runs, {wall:.1f}s")


def test_criterion_6_fde_convergence():
    t0 = time.perf_counter()
    beta, M = 0.5, 2000
    exact, f = manufactured(beta)
    Ns = (32, 64, 128, 256)
    out = [fde_error_report(FDEProblem(beta, M, f, T=1.0, N=N, method="radau2", tol=1e-10), exact)
           for N in Ns]
    errs = np.array([o[0] for o in out])
    mems = np.array([o[1] for o in out], dtype=float)
    # spatial floor: same mesh, temporal error pushed far below it
    floor = fde_error_report(FDEProblem(beta, M, f, T=1.0, N=256, method="radau3", tol=1e-10), exact)[0]
    ratios = errs[:-1] / errs[1:]
    counted = [r for r, fine in zip(ratios, errs[1:]) if fine > 3 * floor]
    ratio_ok = len(counted) >= 1 and all(6 <= r <= 12 for r in counted)
    mem_ok = np.all(np.abs(mems / mems.mean() - 1) <= 0.10)
    wall = time.perf_counter() - t0
    _report("criterion 6 (FDE convergence)", ratio_ok and mem_ok and wall < 300,
            f"errors {' '.join(f'{e:.2e}' for e in errs)}, ratios {' '.join(f'{r:.2f}' for r in ratios)} "
            f"({len(counted)} above 3x spatial floor {floor:.2e}); memory {mems.astype(int).tolist()} B, "
            f"{wall:.1f}s")


def test_criterion_7_analytic_oracles():
    h, N = 1e-2, 1000
    mp.mp.dps = 40
    worst_bdf1 = 0.0
    for alpha in (0.25, 0.5, 0.75):
        exact = np.array([float(mp.mpf(h) ** alpha * mp.gamma(n + alpha) / (mp.gamma(alpha) * mp.gamma(n + 1)))
                          for n in range(1, N + 1)])
        got = np.array([weight_oracle_adaptive(get_method("bdf1"), alpha, h, n)[0] for n in range(1, N + 1)])
        closed = bdf1_weights_analytic(alpha, h, np.arange(1, N + 1))
        worst_bdf1 = max(worst_bdf1, np.max(np.abs(got / exact - 1)), np.max(np.abs(closed / exact - 1)))
    worst_w0 = 0.0
    for name in METHOD_NAMES:
        m = get_method(name)
        for alpha in (0.25, 0.5, 0.75):
            W0 = weights_fft(m, alpha, 0.1, 16).W[0]
            worst_w0 = max(worst_w0, np.max(np.abs(W0 - 0.1**alpha * matrix_frac_power(m.A, alpha))))
    worst_comp = 0.0
    for name in METHOD_NAMES:
        m = get_method(name)
        W1 = weights_fft(m, 0.25, 0.05, 128).W
        W2 = weights_fft(m, 0.5, 0.05, 128).W
        for j in range(129):
            conv = np.einsum("kab,kbc->ac", W1[: j + 1], W1[j::-1])
            worst_comp = max(worst_comp, np.max(np.abs(conv - W2[j])))
    ok = worst_bdf1 <= 1e-12 and worst_w0 <= 1e-10 and worst_comp <= 1e-8
    _report("criterion 7 (analytic oracles)", ok,
            f"BDF1 rel err {worst_bdf1:.2e}, W0 err {worst_w0:.2e}, composition err {worst_comp:.2e}")


def test_criterion_8_kernel_rule():
    t0 = time.perf_counter()
    h, T, n0 = 1e-2, 10.0, 5
    t = np.geomspace(n0 * h, T, 4000)
    worst = []
    for alpha in (0.1, 0.5, 0.9):
        for tol in (1e-4, 1e-8):
            _, rule = build_kernel_rule(alpha, h, T, n0, tol)
            err = np.max(np.abs(rule(t) - t ** (alpha - 1)))
            worst.append(err / tol)
    wall = time.perf_counter() - t0
    _report("criterion 8 (kernel rule)", max(worst) <= 1 and wall < 10,
            f"max error/tol {max(worst):.2f} over 6 cases, {wall:.1f}s")
