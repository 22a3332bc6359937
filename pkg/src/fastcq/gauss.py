"""Gauss-Legendre and Gauss-Jacobi rules on [-1, 1] by Golub-Welsch.

The Jacobi weight is ``(1 + x)^(-alpha)``, i.e. Jacobi parameters
``(a, b) = (0, -alpha)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal


@dataclass(frozen=True)
class QuadRule:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    alpha: float = 0.0

    def __len__(self):
        return len(self.nodes)


def _jacobi_recurrence(n, a, b):
    """Monic three-term recurrence coefficients for the weight (1-x)^a (1+x)^b.

    Returns the diagonal ``alpha_k`` (k < n) and the off-diagonal
    ``sqrt(beta_k)`` (1 <= k < n) of the Jacobi matrix.
    """
    ab = a + b
    k = np.arange(1, n, dtype=float)
    diag = np.empty(n)
    diag[0] = (b - a) / (ab + 2)
    diag[1:] = (b * b - a * a) / ((2 * k + ab) * (2 * k + ab + 2))
    num = 4 * k * (k + a) * (k + b) * (k + ab)
    den = (2 * k + ab) ** 2 * (2 * k + ab + 1) * (2 * k + ab - 1)
    beta = num / den
    return diag, np.sqrt(beta)


def _golub_welsch(diag, offdiag, mu0):
    x, V = eigh_tridiagonal(diag, offdiag)
    w = mu0 * V[0] ** 2
    return x, w


@lru_cache(maxsize=512)
def gauss_legendre(Q: int) -> QuadRule:
    if Q < 1:
        raise ValueError("Q must be >= 1")
    k = np.arange(1, Q, dtype=float)
    offdiag = k / np.sqrt(4 * k * k - 1)
    x, w = _golub_welsch(np.zeros(Q), offdiag, 2.0)
    x = 0.5 * (x - x[::-1])  # enforce exact symmetry
    w = 0.5 * (w + w[::-1])
    return QuadRule(x, w, "legendre")


@lru_cache(maxsize=512)
def gauss_jacobi(Q: int, alpha: float) -> QuadRule:
    """Gauss rule for the weight ``(1 + x)^(-alpha)``, ``0 < alpha < 1``."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    diag, offdiag = _jacobi_recurrence(Q, 0.0, -alpha)
    mu0 = 2 ** (1 - alpha) / (1 - alpha)
    x, w = _golub_welsch(diag, offdiag, mu0)
    return QuadRule(x, w, "jacobi", alpha)
