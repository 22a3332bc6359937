"""Memory-oblivious evaluation of the RK convolution quadrature sums.

With quadrature-derived weights ``omega_n ~ sum_k w_k r_k^n q_k`` for
``n > n0`` (``r_k = r(-h x_k)``, ``q_k = q(-h x_k)``), the far history of the
convolution collapses into one accumulator per node,

    Q_k = sum_{j>=0} r_k^j  q_k . f_{n-n0-1-j},

updated by ``Q_k <- r_k Q_k + q_k . f`` each time a payload leaves the
window of the last ``n0 + 1`` steps.  Only the accumulators and that window
are ever stored.

Payloads are stage vectors of shape ``(s, *rest)``; ``rest`` can be empty
(scalar problems) or e.g. the spatial degrees of freedom of a PDE.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from .cq import WeightTable
from .rk import RKMethod, real_factors
from .weight_quad import WeightRule


class HistoryState:
    """Fast convolution state for one stream of stage payloads.

    Parameters
    ----------
    rule : WeightRule
        Nodes and weights valid for lags ``n > n0``.
    method : RKMethod
    local : WeightTable
        Exact weights for lags ``0..n0``.
    n0 : int
    payload_shape : tuple
        Trailing shape ``rest`` of the payloads (``()`` for scalars).
    """

    def __init__(self, rule: WeightRule, method: RKMethod, local: WeightTable, n0: int,
                 payload_shape=()):
        if len(local) < n0 + 1:
            raise ValueError("need local weights W_0..W_n0")
        self.method = method
        self.n0 = int(n0)
        self.rule = rule
        self.payload_shape = tuple(payload_shape)
        r, q, ones = real_factors(method, rule.nodes, rule.h)
        self._r, self._q = r, q
        self._shape_r = r.reshape((-1,) + (1,) * len(self.payload_shape))
        # tail coefficients: row form w r^(n0+1), stage form w r^n0 (I + h x A)^{-1} 1
        self._tail_row = rule.weights * r ** (n0 + 1)
        self._tail_stage = (rule.weights * r**n0)[:, None] * ones
        self._W_local = np.array(local.W[: n0 + 1])
        self.acc = np.zeros((len(rule),) + self.payload_shape)
        self.ring = deque(maxlen=n0 + 1)
        self.n = 0

    @property
    def n_nodes(self):
        return len(self.rule)

    def memory_bytes(self):
        """Bytes held by accumulators plus a full window (independent of n)."""
        per_payload = int(np.prod(self.payload_shape, dtype=int))
        return 8 * per_payload * (self.n_nodes + (self.n0 + 1) * self.method.s)

    def _absorb(self, f, acc):
        qf = np.tensordot(self._q, f, axes=([1], [0]))
        return self._shape_r * acc + qf

    def advance(self, f_new):
        """Append the stage payload of the next step."""
        f_new = np.asarray(f_new, dtype=float)
        if f_new.shape != (self.method.s,) + self.payload_shape:
            raise ValueError(f"payload shape {f_new.shape} does not match state")
        if len(self.ring) == self.n0 + 1:
            self.acc = self._absorb(self.ring[0], self.acc)
        self.ring.append(f_new.copy())
        self.n += 1

    def _combine(self, acc, shift, stages):
        # local part: lag shift + i against ring[-1 - i]
        W = self._W_local
        out = None
        for i, f in enumerate(reversed(self.ring)):
            lag = i + shift
            if lag > self.n0:
                break
            term = (np.tensordot(W[lag], f, axes=([1], [0])) if stages
                    else np.tensordot(W[lag, -1], f, axes=([0], [0])))
            out = term if out is None else out + term
        if stages:
            tail = np.tensordot(self._tail_stage, acc, axes=([0], [0]))
        else:
            tail = np.tensordot(self._tail_row, acc, axes=([0], [0]))
        return tail if out is None else out + tail

    def evaluate(self, *, stages=False):
        """Convolution including the newest payload, ``sum_{j<=n} W_{n-j} f_j``.

        Returns the full-step value (shape ``rest``) or, with ``stages=True``,
        the stage values (shape ``(s, *rest)``).
        """
        if self.n == 0:
            raise RuntimeError("no payloads yet")
        return self._combine(self.acc, 0, stages)

    def evaluate_history(self, *, stages=True):
        """Lagged sum ``sum_{j<n} W_{n-j} f_j`` over the payloads pushed so far.

        This is the history contribution needed before the payload of step
        ``n`` is known.  The state is not modified.
        """
        if self.n == 0:
            shape = ((self.method.s,) if stages else ()) + self.payload_shape
            return np.zeros(shape)
        acc = self.acc
        if len(self.ring) == self.n0 + 1:
            acc = self._absorb(self.ring[0], acc)
        # the absorbed payloads now sit one lag further back, which the
        # unchanged tail coefficients account for
        return self._combine(acc, 1, stages)
