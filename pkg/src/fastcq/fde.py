"""Time-fractional diffusion ``d_t^beta u - u_xx = f`` on an interval.

Space: P1 finite elements with homogeneous Dirichlet conditions.  Time:
Runge--Kutta convolution quadrature of the Caputo derivative, written as
``I^(1-beta)`` applied to the RK discrete derivative.  With stage values
``U_n`` (shape ``(s, M)``) the discrete derivative of step ``n`` is

    V_n = D0 U_n - D1 U_{n-1},   D0 = A^{-1}/h,  D1 = A^{-1} 1 b^T A^{-1}/h,

and each step solves

    (W0 D0) U_n B + U_n K = F_n - H_n B + (W0 D1) U_{n-1} B,

where ``H_n = sum_{j<n} W_{n-j} V_j`` is the history, ``B``/``K`` are the
mass/stiffness matrices and ``W0 D0 = h^(-beta) A^(-beta)``.  Diagonalizing
``W0 D0`` decouples the stages into ``s`` complex tridiagonal solves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .cq import WeightTable, local_weights, weights_fft
from .fast_conv import HistoryState
from .rk import RKMethod, get_method, matrix_frac_power
from .weight_quad import build_weight_rule, select_parameters


@dataclass
class FEMMatrices:
    """Tridiagonal P1 matrices stored as (sub/super, main) diagonals."""

    mass_diag: np.ndarray
    mass_off: np.ndarray
    stiff_diag: np.ndarray
    stiff_off: np.ndarray
    x: np.ndarray  # interior nodes
    dx: float

    @property
    def M(self):
        return len(self.x)

    def mass_apply(self, U):
        """``U B`` for row-stacked nodal vectors ``U`` (..., M)."""
        out = U * self.mass_diag
        out[..., 1:] += U[..., :-1] * self.mass_off
        out[..., :-1] += U[..., 1:] * self.mass_off
        return out

    def dense(self):
        B = np.diag(self.mass_diag) + np.diag(self.mass_off, 1) + np.diag(self.mass_off, -1)
        K = np.diag(self.stiff_diag) + np.diag(self.stiff_off, 1) + np.diag(self.stiff_off, -1)
        return B, K


def assemble_p1(M, domain=(-1.0, 1.0)) -> FEMMatrices:
    """Uniform-grid P1 mass and stiffness with boundary nodes eliminated."""
    if M < 2:
        raise ValueError("need at least two interior nodes")
    a, b = domain
    if not b > a:
        raise ValueError("empty domain")
    dx = (b - a) / (M + 1)
    x = a + dx * np.arange(1, M + 1)
    return FEMMatrices(
        np.full(M, 2 * dx / 3), np.full(M - 1, dx / 6),
        np.full(M, 2 / dx), np.full(M - 1, -1 / dx), x, dx,
    )


def load_vector(fem: FEMMatrices, g, domain=(-1.0, 1.0)):
    """P1 load vectors ``int g phi_i`` with 2-point Gauss per element.

    ``g`` maps an array of points (shape ``(P,)``) to values, possibly with
    leading batch axes (shape ``(..., P)``).
    """
    a, _ = domain
    edges = a + fem.dx * np.arange(fem.M + 2)
    gp = np.array([-1, 1]) / math.sqrt(3)
    lo, hi = edges[:-1], edges[1:]
    pts = (lo[:, None] + hi[:, None]) / 2 + gp[None, :] * fem.dx / 2  # (M+1, 2)
    vals = np.asarray(g(pts.ravel()), dtype=float)
    vals = vals.reshape(vals.shape[:-1] + pts.shape)
    # hat functions on one element: (1 - xi) for its left node, xi for its right node
    xi = (gp + 1) / 2
    half = fem.dx / 2
    to_left = (vals * (1 - xi)).sum(-1) * half
    to_right = (vals * xi).sum(-1) * half
    # interior node i collects element i-1 (as its right node) and element i (as its left)
    return to_right[..., :-1] + to_left[..., 1:]


@dataclass
class StageSystem:
    D0: np.ndarray
    D1: np.ndarray
    W0D0: np.ndarray
    W0D1: np.ndarray
    lam: np.ndarray
    S: np.ndarray
    Sinv: np.ndarray


def stage_matrices(method: RKMethod, h, beta) -> StageSystem:
    Ainv = method.Ainv
    D0 = Ainv / h
    D1 = np.outer(Ainv @ np.ones(method.s), method.b @ Ainv) / h
    W0 = h ** (1 - beta) * matrix_frac_power(method.A, 1 - beta)
    W0D0 = h ** (-beta) * matrix_frac_power(method.A, -beta)
    lam, S = np.linalg.eig(W0D0)
    if np.any(lam.real <= 0):
        raise ValueError("W0 D0 has eigenvalues outside the right half-plane")
    if np.linalg.cond(S) > 1e10:
        raise ValueError("W0 D0 is numerically defective")
    return StageSystem(D0, D1, W0D0, W0 @ D1, lam, S, np.linalg.inv(S))


@dataclass
class FDEProblem:
    beta: float
    M: int
    f: Callable  # f(x, t) with broadcasting
    T: float = 1.0
    N: int = 64
    method: str = "radau2"
    tol: float = 1e-8
    n0: int = 5
    domain: tuple = (-1.0, 1.0)
    history: str = "fast"  # or "direct"

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.M < 2 or self.N < 1 or self.T <= 0:
            raise ValueError("need M >= 2, N >= 1, T > 0")
        if self.history not in ("fast", "direct"):
            raise ValueError("history must be 'fast' or 'direct'")

    @property
    def h(self):
        return self.T / self.N

    @property
    def rk(self):
        return get_method(self.method)


@dataclass
class FDEResult:
    t: np.ndarray
    u: np.ndarray  # (N+1, M) nodal values at full steps
    fem: FEMMatrices = field(repr=False)
    n_nodes: int
    memory_bytes: int


class _DirectHistory:
    """O(N^2) history with all matrix weights stored; same interface as HistoryState."""

    def __init__(self, table: WeightTable, shape):
        self.W = table.W
        self.V = []
        self.shape = shape

    def advance(self, v):
        self.V.append(v.copy())

    def evaluate_history(self, *, stages=True):
        n = len(self.V)
        if n == 0:
            return np.zeros(self.shape)
        return np.einsum("jab,jbm->am", self.W[n:0:-1], np.array(self.V))

    def memory_bytes(self):
        return 8 * (self.W.size + len(self.V) * int(np.prod(self.shape)))


def _tridiag_solve(lam, fem, rhs):
    # (lam B + K) y = rhs, symmetric tridiagonal, complex
    ab = np.empty((3, fem.M), dtype=complex)
    off = lam * fem.mass_off + fem.stiff_off
    ab[0, 1:] = off
    ab[0, 0] = 0
    ab[1] = lam * fem.mass_diag + fem.stiff_diag
    ab[2, :-1] = off
    ab[2, -1] = 0
    return solve_banded((1, 1), ab, rhs)


def fde_solve(problem: FDEProblem) -> FDEResult:
    m, h, beta = problem.rk, problem.h, problem.beta
    alpha = 1.0 - beta
    fem = assemble_p1(problem.M, problem.domain)
    sys_ = stage_matrices(m, h, beta)
    shape = (m.s, fem.M)
    if problem.history == "fast":
        params = select_parameters(m, alpha, h, problem.T, problem.n0, problem.tol)
        rule = build_weight_rule(params)
        hist = HistoryState(rule, m, local_weights(m, alpha, h, problem.n0), problem.n0, (fem.M,))
        n_nodes = len(rule)
    else:
        hist = _DirectHistory(weights_fft(m, alpha, h, problem.N), shape)
        n_nodes = 0
    u = np.zeros((problem.N + 1, fem.M))
    U_prev = np.zeros(shape)
    for n in range(problem.N):
        tn = (n + m.c) * h
        F = load_vector(fem, lambda x: problem.f(x[None, :], tn[:, None]), problem.domain)
        H = hist.evaluate_history(stages=True)
        R = F - fem.mass_apply(H - sys_.W0D1 @ U_prev)
        Rt = sys_.Sinv @ R
        Y = np.array([_tridiag_solve(lam, fem, Rt[i]) for i, lam in enumerate(sys_.lam)])
        U = sys_.S @ Y
        scale = max(np.max(np.abs(U)), np.finfo(float).tiny)
        if np.max(np.abs(U.imag)) > 1e-9 * scale:
            raise FloatingPointError("stage solve left a large imaginary residue")
        U = U.real
        hist.advance(sys_.D0 @ U - sys_.D1 @ U_prev)
        U_prev = U
        u[n + 1] = U[-1]
    return FDEResult(h * np.arange(problem.N + 1), u, fem, n_nodes, hist.memory_bytes())


def fde_error_report(problem: FDEProblem, exact: Callable):
    """``(L2 error at T, history memory bytes, N_Q)``; ``exact(x, t)``."""
    res = fde_solve(problem)
    e = res.u[-1] - exact(res.fem.x, problem.T)
    err = math.sqrt(max(float(e @ res.fem.mass_apply(e)), 0.0))
    return err, res.memory_bytes, res.n_nodes


def manufactured(beta, power=5):
    """Exact solution ``t^k cos(pi x / 2)`` on (-1, 1) and its forcing."""
    k = power
    c = math.gamma(k + 1) / math.gamma(k + 1 - beta)
    w2 = (math.pi / 2) ** 2

    def exact(x, t):
        return t**k * np.cos(math.pi * np.asarray(x) / 2)

    def f(x, t):
        return (c * t ** (k - beta) + w2 * t**k) * np.cos(math.pi * x / 2)

    return exact, f
