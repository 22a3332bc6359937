import math

import numpy as np
import pytest
from scipy.linalg import eigh

from fastcq.cq import weights_fft
from fastcq.fde import (
    FDEProblem, assemble_p1, fde_error_report, fde_solve, load_vector, manufactured, stage_matrices,
)
from fastcq.rk import get_method, matrix_frac_power
from fastcq.weight_quad import select_parameters


def test_p1_matrices():
    fem = assemble_p1(50, (-1.0, 1.0))
    B, K = fem.dense()
    assert np.allclose(B, B.T) and np.allclose(K, K.T)
    assert np.all(np.linalg.eigvalsh(B) > 0) and np.all(np.linalg.eigvalsh(K) > 0)
    np.testing.assert_allclose(B.sum(axis=1)[1:-1], fem.dx)
    np.testing.assert_allclose(K.sum(axis=1)[1:-1], 0, atol=1e-10)
    # linear nodal data: only the boundary rows see a residual
    res = K @ fem.x
    np.testing.assert_allclose(res[1:-1], 0, atol=1e-10)
    assert abs(res[0]) > 1 and abs(res[-1]) > 1
    np.testing.assert_allclose(fem.mass_apply(fem.x), B @ fem.x)


def test_p1_smallest_eigenvalue():
    fem = assemble_p1(400, (0.0, 3.0))
    B, K = fem.dense()
    lam = eigh(K, B, eigvals_only=True, subset_by_index=(0, 0))[0]
    assert lam == pytest.approx(math.pi**2 / 9, rel=1e-4)


def test_load_vector():
    fem = assemble_p1(20)
    np.testing.assert_allclose(load_vector(fem, lambda x: np.ones_like(x)), fem.dx)
    # two-point Gauss per element integrates quadratics times hats exactly
    x = fem.x
    exact = fem.dx * (x**2 + fem.dx**2 / 6)
    np.testing.assert_allclose(load_vector(fem, lambda y: y**2), exact, rtol=1e-12)
    with pytest.raises(ValueError):
        assemble_p1(1)


def test_stage_matrices_bdf1():
    s = stage_matrices(get_method("bdf1"), 0.1, 0.4)
    assert s.D0[0, 0] == pytest.approx(10) and s.D1[0, 0] == pytest.approx(10)
    assert s.W0D0[0, 0] == pytest.approx(0.1**-0.4)


@pytest.mark.parametrize("beta", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("name", ["radau2", "radau3"])
def test_stage_matrices_radau(name, beta):
    m, h = get_method(name), 0.05
    s = stage_matrices(m, h, beta)
    assert np.all(s.lam.real > 0)
    assert np.all(np.linalg.eigvals(matrix_frac_power(m.A, -beta)).real > 0)
    W0 = h ** (1 - beta) * matrix_frac_power(m.A, 1 - beta)
    np.testing.assert_allclose(W0 @ s.D0, s.W0D0, atol=1e-10 * np.abs(s.W0D0).max())
    np.testing.assert_allclose(s.W0D0 @ np.linalg.inv(s.W0D0), np.eye(m.s), atol=1e-12)
    np.testing.assert_allclose((s.S * s.lam) @ s.Sinv, s.W0D0, atol=1e-10 * np.abs(s.W0D0).max())


@pytest.mark.parametrize("name", ["bdf1", "radau2", "radau3"])
def test_splitting_consistency(name):
    # I^(1-beta) applied to the RK derivative equals the beta-derivative weights
    m, h, beta, N = get_method(name), 0.05, 0.4, 64
    s = stage_matrices(m, h, beta)
    Wi = weights_fft(m, 1 - beta, h, N).W
    Wd = weights_fft(m, -beta, h, N).W
    t = (np.arange(N)[:, None] + m.c) * h
    U = np.sin(t) * t**2
    V = np.einsum("ab,nb->na", s.D0, U)
    V[1:] -= np.einsum("ab,nb->na", s.D1, U[:-1])
    for n in range(N):
        lhs = np.einsum("jab,jb->a", Wi[n::-1], V[: n + 1])
        rhs = np.einsum("jab,jb->a", Wd[n::-1], U[: n + 1])
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_zero_forcing_gives_zero():
    f = lambda x, t: np.zeros(np.broadcast(x, t).shape)
    res = fde_solve(FDEProblem(0.5, 30, f, T=1.0, N=16))
    assert np.all(res.u == 0)


def test_manufactured_convergence():
    exact, f = manufactured(0.5)
    errs = [fde_error_report(FDEProblem(0.5, 1000, f, T=1.0, N=N, tol=1e-10), exact)[0] for N in (8, 16, 32)]
    ratios = np.array(errs[:-1]) / errs[1:]
    assert np.all((ratios > 5) & (ratios < 12))


def test_fast_vs_direct_history():
    exact, f = manufactured(0.5)
    tol = 1e-8
    a = fde_solve(FDEProblem(0.5, 100, f, T=1.0, N=64, tol=tol))
    b = fde_solve(FDEProblem(0.5, 100, f, T=1.0, N=64, tol=tol, history="direct"))
    assert np.max(np.abs(a.u[-1] - b.u[-1])) <= 10 * tol
    assert b.memory_bytes > a.memory_bytes


def test_bounded_as_h_shrinks():
    f = lambda x, t: np.cos(math.pi * x / 2) * np.ones_like(t)
    peaks = [np.abs(fde_solve(FDEProblem(0.7, 40, f, T=2.0, N=N)).u).max() for N in (16, 64, 256)]
    assert max(peaks) < 2 * min(peaks)


def test_report_counts_and_memory():
    exact, f = manufactured(0.5)
    out = [fde_error_report(FDEProblem(0.5, 100, f, T=1.0, N=N, tol=1e-8), exact) for N in (16, 32, 64)]
    for (err, mem, nq), N in zip(out, (16, 32, 64)):
        assert nq == select_parameters(get_method("radau2"), 0.5, 1 / N, 1.0, 5, 1e-8).n_nodes
        assert mem == 8 * 100 * (nq + 6 * 2)


def test_problem_validation():
    f = lambda x, t: 0 * x
    with pytest.raises(ValueError):
        FDEProblem(1.2, 10, f)
    with pytest.raises(ValueError):
        FDEProblem(0.5, 1, f)
    with pytest.raises(ValueError):
        FDEProblem(0.5, 10, f, history="cache")
