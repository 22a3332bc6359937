"""Certified real-axis quadrature for the Runge--Kutta CQ weights.

For the fractional integral of order ``alpha`` the weights satisfy

    omega_n = h sin(pi alpha)/pi * int_0^inf x^(-alpha) e_n(-h x) dx,
    e_n(z) = r(z)^n q(z),

and the matrix weights ``W_n`` have the same form with
``E_n(z) = r(z)^(n-1) (I - zA)^{-1} 1 q(z)``.  One set of nodes and weights
serves every ``n0 < n <= N``: Gauss-Jacobi on ``[0, L0]`` and Gauss-Legendre
on geometrically growing panels up to ``L = A/h``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .gauss import gauss_jacobi, gauss_legendre
from .rk import RKMethod, real_factors

A_STEP = 0.125
B_TARGET = 3.0
EPS_GRID = np.arange(1, 100) / 100.0
Q_MAX = 200
TOL_MIN = 1e-15

# number of times the rho_max fallback of the Gauss-Jacobi bound has fired
rho_fallback_count = 0


@dataclass
class WeightParams:
    method: RKMethod
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
    rho_opt_used: bool = True

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
class WeightRule:
    nodes: np.ndarray
    weights: np.ndarray
    h: float
    alpha: float

    def __len__(self):
        return len(self.nodes)


def _prefactor(alpha):
    return math.sin(math.pi * alpha) / math.pi


def en_norm(method, n, y):
    """``||e_n(-y)||_2`` for real ``y >= 0``."""
    r, q, _ = real_factors(method, y, 1.0)
    return np.abs(r) ** n * np.linalg.norm(q, axis=-1)


def truncation_bound(method, alpha, h, n0, A, *, envelope=False, epsabs=None):
    """Bound on the truncation error of the weight integral at ``L = A/h``.

    The integrand is the actual ``||e_{n0+1}(-x)|| x^(-alpha)``; with
    ``envelope=True`` the looser decay envelope ``(x0 + c x)^(-n0-2)`` is used
    instead.  ``epsabs`` is the absolute accuracy of the returned bound.
    """
    n = n0 + 1
    pref = h**alpha * _prefactor(alpha)
    if envelope:
        c, x0 = method.decay_c, method.decay_x0
        g = lambda x: (x0 + c * x) ** (-n - 1)
    else:
        g = lambda x: en_norm(method, n, x)
    f = lambda x: x ** (-alpha) * g(x)
    kw = {} if epsabs is None else {"epsabs": epsabs / pref, "epsrel": 1e-8}
    if A <= 0:
        # the x^(-alpha) singularity goes into the algebraic weight
        head, _ = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(-alpha, 0.0), limit=200, **kw)
        tail, _ = integrate.quad(f, 1.0, np.inf, limit=200, **kw)
        return pref * (head + tail)
    val, _ = integrate.quad(f, A, np.inf, limit=200, **kw)
    return pref * val


def _smallest_grid_point(ok, max_doublings=30):
    """Smallest ``k * A_STEP`` with ``ok`` true, for ``ok`` monotone in A.

    Brackets by doubling, then bisects on the grid; equivalent to stepping
    up from zero but logarithmic in the answer.
    """
    if ok(0.0):
        return 0.0
    hi = 1
    while not ok(hi * A_STEP):
        hi *= 2
        if hi > 2**max_doublings:
            raise RuntimeError("truncation search did not terminate; tolerance too small?")
    lo = hi // 2  # ok(lo) is false (or lo == 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid * A_STEP):
            hi = mid
        else:
            lo = mid
    return hi * A_STEP


def weight_truncation_A(method, alpha, h, n0, tol, *, envelope=False):
    """Smallest ``A`` on the 0.125 grid whose truncation bound is ``<= tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return _smallest_grid_point(
        lambda A: truncation_bound(method, alpha, h, n0, A, envelope=envelope, epsabs=tol / 100) <= tol
    )


def closed_form_A(method, alpha, h, n0, tol):
    """Closed-form sufficient truncation parameter with ``n = n0 + 1``."""
    n = n0 + 1
    c = method.decay_c
    return (h**alpha * _prefactor(alpha) / (tol * n * c ** (n + 1))) ** (1.0 / (n + alpha))


def rho_bounds(method, Q, L0, T, h):
    b = method.pole_margin
    u = 2 * b / (L0 * h)
    rho_max = 1 + u + math.sqrt(u * u + 2 * u)
    v = 4 * Q / (method.gamma * T * L0)
    rho_opt = v + math.sqrt(1 + v * v)
    return rho_opt, rho_max


def weight_gj_bound(method, Q, L0, T, h, alpha, *, return_branch=False):
    """Error bound for the Gauss-Jacobi part on ``[0, L0]``."""
    global rho_fallback_count
    g, Cq = method.gamma, method.Cq
    pref = Cq * h * L0 ** (1 - alpha) * _prefactor(alpha) / (1 - alpha)
    rho_opt, rho_max = rho_bounds(method, Q, L0, T, h)
    if 1 < rho_opt < rho_max:
        x = g * T * L0
        val = pref * (1 + x / (4 * Q)) * (math.e * x / (8 * Q)) ** (2 * Q)
        used = True
    else:
        rho_fallback_count += 1
        val = pref * rho_max ** (-2 * Q + 1) / (rho_max - 1) * math.exp(
            g * T * method.pole_margin / h
        )
        used = False
    return (val, used) if return_branch else val


def g_eps(eps, B):
    u = 1 + 2.0 / B * (1 - eps)
    return u + np.sqrt(u * u - 1)


def weight_panel_bound(method, Q, L_prev, B, h, n0, alpha, *, denom_minus_one=True):
    """Error bound for ``Q``-point Gauss-Legendre on ``[L_prev, (1+B) L_prev]``."""
    eps = EPS_GRID
    g = g_eps(eps, B)
    den = g - 1 if denom_minus_one else g
    c, x0 = method.decay_c, method.decay_x0
    env = np.minimum(method.Cq, np.abs(x0 + c * L_prev * h * eps) ** (-n0 - 2))
    with np.errstate(over="ignore", under="ignore"):
        vals = g ** (-2 * Q + 1) / den * eps ** (-alpha) * env
    pref = 4 * h * B * L_prev ** (1 - alpha) * _prefactor(alpha)
    return float(pref * np.min(vals))


def _smallest_Q(bound, target):
    for Q in range(1, Q_MAX + 1):
        if bound(Q) <= target:
            return Q
    raise RuntimeError(f"no Q <= {Q_MAX} meets the target {target:g}")


def panel_layout(L, L0, B_target=B_TARGET):
    """Panel count and re-fitted ratio so that ``L0 (1+B)^J = L``."""
    if L <= 0:
        raise ValueError("L must be positive")
    if L <= L0:
        return 0, B_target
    J = int(math.floor(math.log(L / L0) / math.log(1 + B_target)))
    J = max(J, 1)
    B = (L / L0) ** (1.0 / J) - 1
    return J, B


def select_parameters(method, alpha, h, T, n0=5, tol=1e-6, *, envelope=False,
                      denom_minus_one=True, split_panel_tol=True) -> WeightParams:
    """Quadrature parameters certified to ``tol`` for every ``n0 < n <= T/h``.

    ``split_panel_tol=False`` gives every panel the budget ``tol/3`` instead
    of ``tol/(3J)``; the sum of the bounds is then no longer certified.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if tol <= 0 or h <= 0:
        raise ValueError("h and tol must be positive")
    if tol < TOL_MIN:
        raise ValueError(f"tol below {TOL_MIN:g} is not attainable in double precision")
    if T < (n0 + 1) * h:
        raise ValueError("T must be at least (n0 + 1) h")
    L0 = 4.0 / T
    A = weight_truncation_A(method, alpha, h, n0, tol / 3, envelope=envelope)
    J, B = panel_layout(A / h, L0)
    Q0 = _smallest_Q(lambda Q: weight_gj_bound(method, Q, L0, T, h, alpha), tol / 3)
    _, used = weight_gj_bound(method, Q0, L0, T, h, alpha, return_branch=True)
    ends = L0 * (1 + B) ** np.arange(J + 1)
    Qj = [
        _smallest_Q(
            lambda Q, Lp=Lp: weight_panel_bound(
                method, Q, Lp, B, h, n0, alpha, denom_minus_one=denom_minus_one
            ),
            tol / (3 * J) if split_panel_tol else tol / 3,
        )
        for Lp in ends[:-1]
    ]
    return WeightParams(method, alpha, h, T, n0, tol, L0, A, B, J, Q0, Qj, used)


def build_weight_rule(params: WeightParams) -> WeightRule:
    alpha, h = params.alpha, params.h
    pref = h * _prefactor(alpha)
    gj = gauss_jacobi(params.Q0, alpha)
    L0 = params.L0
    nodes = [(gj.nodes + 1) * L0 / 2]
    weights = [pref * (L0 / 2) ** (1 - alpha) * gj.weights]
    ends = params.panel_ends
    for a, b, Q in zip(ends[:-1], ends[1:], params.Qj):
        gl = gauss_legendre(Q)
        x = a + (gl.nodes + 1) * (b - a) / 2
        nodes.append(x)
        weights.append(pref * (b - a) / 2 * gl.weights * x ** (-alpha))
    return WeightRule(np.concatenate(nodes), np.concatenate(weights), h, alpha)


def weights_from_rule(rule: WeightRule, method: RKMethod, n):
    """Row weights ``sum_k w_k r_k^n q_k``; ``n`` scalar or array."""
    r, q, _ = real_factors(method, rule.nodes, rule.h)
    n = np.asarray(n)
    coef = rule.weights * r ** n[..., None]
    return coef @ q


def weight_matrix_from_rule(rule: WeightRule, method: RKMethod, n):
    """Matrix weights ``sum_k w_k r_k^(n-1) (I + h x_k A)^{-1} 1 q_k``."""
    r, q, ones = real_factors(method, rule.nodes, rule.h)
    n = np.asarray(n)
    coef = rule.weights * r ** (n[..., None] - 1)
    return np.einsum("...k,ki,kj->...ij", coef, ones, q)
