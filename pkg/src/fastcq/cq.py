"""Reference Runge--Kutta convolution quadrature.

These are the standard (memory-hungry) routes, used as oracles for the fast
algorithm and as the ``fft_reference``/``direct`` modes of the evaluators:

* :func:`weights_fft` -- all weight matrices from the generating function
  ``(Delta(zeta)/h)^(-alpha) = sum_j W_j zeta^j`` by a scaled FFT;
* :func:`weight_oracle_adaptive` -- one weight from its real-line integral,
  to ~1e-12 relative accuracy;
* :func:`direct_convolution` -- the O(N^2) discrete convolution;
* :func:`bdf1_weights_analytic` -- closed form for backward Euler.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rk import RKMethod, delta_matrix, matrix_frac_power, real_factors


@dataclass(frozen=True)
class WeightTable:
    W: np.ndarray  # (N+1, s, s)
    h: float
    alpha: float
    method: RKMethod

    @property
    def omega(self):
        """Row weights: the last rows of ``W``."""
        return self.W[:, -1, :]

    def __len__(self):
        return len(self.W)


def _matrix_power_batched(D, mu):
    lam, V = np.linalg.eig(D)
    if np.any((lam.real <= 0) & (np.abs(lam.imag) <= 1e-14 * np.abs(lam))):
        raise ValueError("Delta(zeta) has an eigenvalue on the branch cut")
    return (V * lam[..., None, :] ** mu) @ np.linalg.inv(V)


def weights_fft(method: RKMethod, alpha, h, N, *, oversample=4, radius=None) -> WeightTable:
    """Weight matrices ``W_0..W_N`` of ``K(z) = z^(-alpha)``.

    Coefficients are extracted on the circle ``|zeta| = radius`` with
    ``M = oversample * N`` points.  The default radius ``eps^(1/(M+N))``
    balances aliasing against roundoff amplification, giving roughly
    ``eps^(4/5)`` relative accuracy.  ``alpha`` may be negative (fractional
    derivatives).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    M = max(int(oversample * N), N + 1, 16)
    eps = np.finfo(float).eps
    rho = eps ** (1.0 / (M + N)) if radius is None else radius
    zeta = rho * np.exp(2j * np.pi * np.arange(M) / M)
    K = h**alpha * _matrix_power_batched(delta_matrix(method, zeta), -alpha)
    coef = np.fft.fft(K, axis=0)[: N + 1] / M
    coef *= rho ** (-np.arange(N + 1.0))[:, None, None]
    scale = max(np.max(np.abs(coef)), np.finfo(float).tiny)
    if np.max(np.abs(coef.imag)) > 1e-8 * scale:
        raise FloatingPointError("FFT weights have a large imaginary residue")
    W = coef.real
    W[0] = h**alpha * matrix_frac_power(method.A, alpha)
    return WeightTable(W, h, alpha, method)


def local_weights(method: RKMethod, alpha, h, n0) -> WeightTable:
    """``W_0..W_n0`` to near machine precision (short table, heavy oversampling)."""
    N = max(n0, 1)
    return weights_fft(method, alpha, h, N, oversample=max(16, 96 // N))


def _integrand_values(method, n, y, matrix):
    r, q, ones = real_factors(method, y, 1.0)
    if matrix:
        return (r ** (n - 1))[:, None, None] * ones[:, :, None] * q[:, None, :]
    return (r**n)[:, None] * q


def weight_oracle_adaptive(method: RKMethod, alpha, h, n, *, rtol=1e-12, matrix=False,
                           max_levels=14):
    """Weight ``omega_n`` (or ``W_n`` with ``matrix=True``) from the real-line integral.

    Uses ``y = exp(u / (1 - alpha))``, which turns the integral into
    ``1/(1-alpha) int exp(u) e_n(-y(u)) du`` with exponential decay at both
    ends, then the trapezoidal rule with step halving until two levels agree
    to ``rtol``.
    """
    if n < 1:
        raise ValueError("n must be >= 1 (n = 0 is h^alpha A^alpha exactly)")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    a1 = 1.0 - alpha
    c = method.decay_c
    tail = 1e-18
    u_lo = math.log(tail)
    logY = (-(n + 1) * math.log(c) - math.log((n + alpha) * tail)) / (n + alpha)
    u_hi = a1 * max(logY, 1.0)
    step = a1 / 4
    grid = np.arange(u_lo, u_hi + step, step)

    def f(u):
        y = np.exp(u / a1)
        vals = _integrand_values(method, n, y, matrix)
        return vals * (np.exp(u) / a1).reshape((-1,) + (1,) * (vals.ndim - 1))

    total = f(grid).sum(axis=0)
    prev = total * step
    for _ in range(max_levels):
        mid = grid[:-1] + step / 2
        total = total + f(mid).sum(axis=0)
        grid = np.sort(np.concatenate([grid, mid]))
        step /= 2
        cur = total * step
        err = np.max(np.abs(cur - prev))
        if err <= rtol * np.max(np.abs(cur)):
            return h**alpha * math.sin(math.pi * alpha) / math.pi * cur
        prev = cur
    raise RuntimeError(f"adaptive weight oracle did not converge (last change {err:.3e})")


def direct_convolution(table: WeightTable, f_stages, *, stages=False):
    """Discrete convolution ``sum_{j<=n} W_{n-j} f_j`` for ``n = 0..len(f)-1``.

    ``f_stages`` has shape ``(N, s, ...)``.  Returns the full-step values at
    ``t_{n+1}`` (shape ``(N, ...)``) or, with ``stages=True``, all stage
    values (shape ``(N, s, ...)``).
    """
    f = np.asarray(f_stages, dtype=float)
    N = len(f)
    if len(table) < N:
        raise ValueError("weight table shorter than the data")
    W = table.W if stages else table.omega
    out = []
    for n in range(N):
        Wn = W[n::-1]  # W_n, ..., W_0 against f_0, ..., f_n
        if stages:
            out.append(np.einsum("jab,jb...->a...", Wn, f[: n + 1]))
        else:
            out.append(np.einsum("jb,jb...->...", Wn, f[: n + 1]))
    return np.array(out)


def bdf1_weights_analytic(alpha, h, n):
    """``h^alpha Gamma(n+alpha) / (Gamma(alpha) Gamma(n+1))``.

    Evaluated by the product ``prod_{k<=n} (k-1+alpha)/k``, which keeps the
    relative error near ``n`` ulps (log-gamma differences lose ~1e-12 by n=1000).
    """
    n = np.asarray(n)
    if np.any(n < 0) or np.any(n != np.floor(n)):
        raise ValueError("n must be a non-negative integer")
    n = n.astype(int)
    top = int(n.max()) if n.size else 0
    k = np.arange(1, top + 1)
    ratios = np.concatenate([[1.0], np.cumprod((k - 1 + alpha) / k)])
    return h**alpha * ratios[n]
