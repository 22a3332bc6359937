"""Stiffly accurate, A-stable Runge--Kutta methods used as the basis of CQ.

Three methods are built in: backward Euler (``bdf1``), and the 2- and 3-stage
Radau IIA methods. Each carries the constants that enter the quadrature error
bounds:

* ``pole_margin`` and the growth constants ``gamma``/``Cq`` with
  ``|r(z)| <= exp(gamma Re z)`` for ``0 <= Re z <= pole_margin`` and
  ``||q(z)|| <= Cq`` for ``Re z <= pole_margin``;
* the decay constants ``decay_c``/``decay_x0`` with
  ``||r(z)^n q(z)|| <= |x0 - c Re z|^(-n-1)`` for ``Re z < 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class RKMethod:
    name: str
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    p: int
    q: int
    pole_margin: float
    gamma: float
    Cq: float
    decay_c: float
    decay_x0: float
    Ainv: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.Ainv is None:
            object.__setattr__(self, "Ainv", np.linalg.inv(self.A))

    @property
    def s(self) -> int:
        return len(self.b)


def stability_r(method: RKMethod, z):
    """Stability function ``r(z) = 1 + z b^T (I - zA)^{-1} 1``.

    Accepts a scalar or an array of ``z``; raises ``numpy.linalg.LinAlgError``
    at a pole.
    """
    z = np.asarray(z, dtype=complex)
    y = _resolvent_ones(method, z)
    out = 1.0 + z * (y @ method.b)
    return out[()] if out.ndim == 0 else out


def q_row(method: RKMethod, z):
    """Row vector ``q(z) = b^T (I - zA)^{-1}``; shape ``z.shape + (s,)``."""
    z = np.asarray(z, dtype=complex)
    s = method.s
    M = np.eye(s) - z[..., None, None] * method.A
    # q^T solves (I - zA)^T q^T = b
    Mt = np.swapaxes(M, -1, -2)
    rhs = np.broadcast_to(method.b.astype(complex), z.shape + (s,))[..., None]
    return np.linalg.solve(Mt, rhs)[..., 0]


def stage_ones(method: RKMethod, z):
    """Column vector ``(I - zA)^{-1} 1``; shape ``z.shape + (s,)``."""
    return _resolvent_ones(method, np.asarray(z, dtype=complex))


def _resolvent_ones(method, z):
    s = method.s
    M = np.eye(s) - z[..., None, None] * method.A
    rhs = np.ones(z.shape + (s, 1), dtype=complex)
    return np.linalg.solve(M, rhs)[..., 0]


def real_factors(method: RKMethod, x, h):
    """``r(-hx)``, ``q(-hx)`` and ``(I + hxA)^{-1} 1`` for real ``x >= 0``.

    Real arithmetic throughout; this is what the fast recursions consume.
    """
    x = np.asarray(x, dtype=float)
    s = method.s
    M = np.eye(s) + (h * x)[..., None, None] * method.A
    ones = np.linalg.solve(M, np.ones(x.shape + (s, 1)))[..., 0]
    rhs = np.broadcast_to(method.b, x.shape + (s,))[..., None]
    q = np.linalg.solve(np.swapaxes(M, -1, -2), rhs)[..., 0]
    r = 1.0 - h * x * (ones @ method.b)
    return r, q, ones


def delta_matrix(method: RKMethod, zeta):
    """``Delta(zeta) = A^{-1} - zeta A^{-1} 1 b^T A^{-1}``; batched over ``zeta``."""
    zeta = np.asarray(zeta, dtype=complex)
    Ainv = method.Ainv
    D1 = np.outer(Ainv @ np.ones(method.s), method.b @ Ainv)
    return Ainv - zeta[..., None, None] * D1


def matrix_frac_power(M, mu, *, imag_tol=1e-12):
    """Principal power ``M**mu`` via eigendecomposition.

    Works batched over leading axes. A real input whose result has imaginary
    parts below ``imag_tol`` (relative) is returned as a real array.
    """
    M = np.asarray(M)
    lam, V = np.linalg.eig(M)
    if np.any((np.abs(lam.imag) <= 1e-14 * np.abs(lam)) & (lam.real <= 0)):
        raise ValueError("eigenvalue on the branch cut (closed negative real axis)")
    cond = np.linalg.cond(V)
    if np.any(cond > 1e10):
        raise ValueError("matrix is numerically defective")
    P = (V * lam[..., None, :].astype(complex) ** mu) @ np.linalg.inv(V)
    if np.isrealobj(M):
        scale = max(np.max(np.abs(P)), 1.0)
        if np.max(np.abs(P.imag)) <= imag_tol * scale:
            return P.real
    return P


def pole_locations(method: RKMethod):
    """Poles of ``r`` and ``q``: the eigenvalues of ``A^{-1}``."""
    return np.linalg.eigvals(method.Ainv)


def growth_constants(method: RKMethod, pole_margin: float, *, y_max=1e4, samples=100_000):
    """Numerical ``(gamma, Cq)`` for a given margin ``b`` below the poles.

    ``gamma = max(1, sup_{Re z = b} log|r(z)| / b)`` and ``Cq`` is the sup of
    ``||q(z)||_2`` over ``Re z = 0`` and ``Re z = b``, both by dense sampling
    of ``|Im z|`` on a log grid (the functions are conjugate-symmetric).
    """
    if pole_margin >= np.min(pole_locations(method).real):
        raise ValueError("pole_margin must lie below the poles of r")
    y = np.concatenate([[0.0], np.logspace(-4, np.log10(y_max), samples - 1)])
    zb = pole_margin + 1j * y
    gamma = max(1.0, np.max(np.log(np.abs(stability_r(method, zb)))) / pole_margin)
    Cq = max(
        np.max(np.linalg.norm(q_row(method, 1j * y), axis=-1)),
        np.max(np.linalg.norm(q_row(method, zb), axis=-1)),
    )
    return float(gamma), float(Cq)


_DECAY = {"bdf1": (1.0, 1.0), "radau2": (0.5, 1.0), "radau3": (0.3245, 0.8699)}


def decay_constants(method: RKMethod):
    return _DECAY[method.name]


def _radau3_tableau():
    r6 = np.sqrt(6.0)
    A = np.array([
        [(88 - 7 * r6) / 360, (296 - 169 * r6) / 1800, (-2 + 3 * r6) / 225],
        [(296 + 169 * r6) / 1800, (88 + 7 * r6) / 360, (-2 - 3 * r6) / 225],
        [(16 - r6) / 36, (16 + r6) / 36, 1 / 9],
    ])
    c = np.array([(4 - r6) / 10, (4 + r6) / 10, 1.0])
    return A, A[-1].copy(), c


_TABLEAUX = {
    "bdf1": (np.array([[1.0]]), np.array([1.0]), np.array([1.0]), 1, 1),
    "radau2": (
        np.array([[5 / 12, -1 / 12], [3 / 4, 1 / 4]]),
        np.array([3 / 4, 1 / 4]),
        np.array([1 / 3, 1.0]),
        3,
        2,
    ),
    "radau3": (*_radau3_tableau(), 5, 3),
}

# margins b below the poles used for the growth constants
DEFAULT_POLE_MARGIN = {"bdf1": 0.1, "radau2": 1.0, "radau3": 1.0}

METHOD_NAMES = tuple(_TABLEAUX)


@lru_cache(maxsize=None)
def get_method(name: str, pole_margin: float | None = None) -> RKMethod:
    """Build one of the built-in methods, computing its growth constants.

    >>> get_method("radau2").s
    2
    """
    name = name.lower()
    if name not in _TABLEAUX:
        raise KeyError(f"unknown method {name!r}; choose from {METHOD_NAMES}")
    A, b, c, p, q = _TABLEAUX[name]
    b_margin = DEFAULT_POLE_MARGIN[name] if pole_margin is None else float(pole_margin)
    proto = RKMethod(name, A, b, c, p, q, b_margin, 1.0, 1.0, *_DECAY[name])
    if name == "bdf1":
        # closed forms: r = q = 1/(1-z)
        gamma = max(1.0, -np.log1p(-b_margin) / b_margin)
        Cq = 1.0 / (1.0 - b_margin)
    else:
        gamma, Cq = growth_constants(proto, b_margin)
    return RKMethod(name, A, b, c, p, q, b_margin, gamma, Cq, *_DECAY[name])
