"""Sum-of-exponentials approximation of the kernel ``t^(alpha-1)``.

Starting from

    t^(alpha-1) = 1/Gamma(1-alpha) * int_0^inf x^(-alpha) exp(-t x) dx,

the integral is truncated at ``L = A/h`` and split into a Gauss-Jacobi part on
``[0, L0]`` and Gauss-Legendre panels ``[L_{j-1}, (1+B) L_{j-1}]``.  The node
counts are the smallest ones whose a priori error bounds meet ``tol`` for
every ``t`` in ``[n0 h, T]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import gammaincc

from .gauss import gauss_jacobi, gauss_legendre
from .weight_quad import A_STEP, B_TARGET, EPS_GRID, TOL_MIN, _smallest_Q, g_eps, panel_layout

A_MIN = 1.0


@dataclass
class KernelParams:
    alpha: float
    h: float
    T: float
    n0: int
    tol: float
    L0: float
    A_trunc: float
    B: float
    J: int
    Q0: int
    Qj: list = field(default_factory=list)

    @property
    def L(self):
        return self.A_trunc / self.h

    @property
    def panel_ends(self):
        return self.L0 * (1 + self.B) ** np.arange(self.J + 1)

    @property
    def n_nodes(self):
        return self.Q0 + sum(self.Qj)


@dataclass(frozen=True)
class KernelRule:
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.nodes)

    def __call__(self, t):
        """``sum_k w_k exp(-t x_k)``, vectorized over ``t``."""
        t = np.asarray(t, dtype=float)
        return np.exp(-np.multiply.outer(t, self.nodes)) @ self.weights


def kernel_truncation_bound(alpha, h, n0, A):
    """``h^(alpha-1)/Gamma(1-alpha) int_A^inf x^(-alpha) exp(-n0 x) dx``.

    The tail integral is an upper incomplete gamma function, so no numerical
    integration is needed.
    """
    a = 1.0 - alpha
    return h ** (alpha - 1) * n0 ** (-a) * gammaincc(a, n0 * A)


def kernel_truncation_seed(alpha, h, n0, tol):
    """Closed-form truncation parameter, valid for ``A >= 1``."""
    return math.log(1.0 / (n0 * gamma_fn(1 - alpha) * tol)) + (1 - alpha) * math.log(1.0 / h)


def kernel_truncation_A(alpha, h, n0, tol):
    """Smallest ``A >= 1`` on the 0.125 grid with truncation bound ``<= tol``.

    The search starts from the closed-form seed and walks down or up.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    seed = kernel_truncation_seed(alpha, h, n0, tol)
    A = max(A_MIN, A_STEP * math.ceil(seed / A_STEP))
    ok = lambda A: kernel_truncation_bound(alpha, h, n0, A) <= tol
    while A > A_MIN and ok(A - A_STEP):
        A -= A_STEP
    while not ok(A):
        A += A_STEP
    return A


def kernel_gj_bound(Q, L0, T, alpha):
    """Error bound for ``Q``-point Gauss-Jacobi on ``[0, L0]``, uniform in ``t <= T``."""
    if L0 == 0:
        return 0.0
    x = T * L0
    return (4 * L0 ** (1 - alpha) / gamma_fn(2 - alpha)
            * (1 + x / (4 * Q)) * (math.e * x / (8 * Q)) ** (2 * Q))


def kernel_panel_bound(Q, L_prev, B, t_min, alpha):
    """Error bound for ``Q``-point Gauss-Legendre on ``[L_prev, (1+B) L_prev]``, ``t >= t_min``."""
    eps = EPS_GRID
    g = g_eps(eps, B)
    with np.errstate(over="ignore", under="ignore"):
        vals = g ** (-2 * Q + 1) / (g - 1) * eps ** (-alpha) * np.exp(-t_min * L_prev * eps)
    return float(4 * B * L_prev ** (1 - alpha) / gamma_fn(1 - alpha) * np.min(vals))


def select_kernel_parameters(alpha, h, T, n0=5, tol=1e-6) -> KernelParams:
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if tol <= 0 or h <= 0:
        raise ValueError("h and tol must be positive")
    if tol < TOL_MIN:
        raise ValueError(f"tol below {TOL_MIN:g} is not attainable in double precision")
    if T < n0 * h:
        raise ValueError("T must be at least n0 h")
    L0 = 4.0 / (math.e * T)
    A = kernel_truncation_A(alpha, h, n0, tol / 3)
    J, B = panel_layout(A / h, L0, B_TARGET)
    Q0 = _smallest_Q(lambda Q: kernel_gj_bound(Q, L0, T, alpha), tol / 3)
    t_min = n0 * h
    ends = L0 * (1 + B) ** np.arange(J + 1)
    Qj = [
        _smallest_Q(lambda Q, Lp=Lp: kernel_panel_bound(Q, Lp, B, t_min, alpha), tol / (3 * J))
        for Lp in ends[:-1]
    ]
    return KernelParams(alpha, h, T, n0, tol, L0, A, B, J, Q0, Qj)


def build_kernel_rule(alpha, h, T, n0=5, tol=1e-6):
    """Certified parameters and the resulting rule; returns ``(params, rule)``."""
    p = select_kernel_parameters(alpha, h, T, n0, tol)
    scale = 1.0 / gamma_fn(1 - alpha)
    gj = gauss_jacobi(p.Q0, alpha)
    nodes = [(gj.nodes + 1) * p.L0 / 2]
    weights = [scale * (p.L0 / 2) ** (1 - alpha) * gj.weights]
    ends = p.panel_ends
    for a, b, Q in zip(ends[:-1], ends[1:], p.Qj):
        gl = gauss_legendre(Q)
        x = a + (gl.nodes + 1) * (b - a) / 2
        nodes.append(x)
        weights.append(scale * (b - a) / 2 * gl.weights * x ** (-alpha))
    return p, KernelRule(np.concatenate(nodes), np.concatenate(weights))
