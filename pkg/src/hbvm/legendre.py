"""Shifted Legendre polynomials on [0, 1] and Gauss-Legendre rules.

The shifted family satisfies ``P_j(t) = L_j(2t - 1)`` where ``L_j`` is the
classical Legendre polynomial, so

    int_0^1 P_i P_j dt = delta_ij / (2i + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_NODES = 64
_NEWTON_MAXITER = 100


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on [0, 1].

    Attributes
    ----------
    k : int
        Number of nodes.
    nodes : ndarray
        Abscissae in (0, 1), strictly increasing.
    weights : ndarray
        Positive weights summing to one.
    precision : int
        Degree of exactness, ``2k - 1``.
    """

    k: int
    nodes: np.ndarray
    weights: np.ndarray
    precision: int

    def integrate(self, values):
        """Apply the rule to samples taken at ``self.nodes`` (first axis)."""
        return np.tensordot(self.weights, np.asarray(values, dtype=float), axes=(0, 0))


def _check_degree(j):
    if int(j) != j or j < 0:
        raise ValueError(f"degree index must be a non-negative integer, got {j!r}")
    return int(j)


def legendre_table(n, t):
    """Return ``P_0(t), ..., P_n(t)`` stacked along a new leading axis.

    Uses the three-term recurrence in ``x = 2t - 1``.
    """
    n = _check_degree(n)
    x = 2.0 * np.asarray(t, dtype=float) - 1.0
    out = np.empty((n + 1,) + x.shape)
    out[0] = 1.0
    if n >= 1:
        out[1] = x
    for i in range(1, n):
        out[i + 1] = ((2 * i + 1) * x * out[i] - i * out[i - 1]) / (i + 1)
    return out


def legendre_eval(j, t):
    """Shifted Legendre polynomial ``P_j`` evaluated at ``t``.

    >>> legendre_eval(2, 0.0)
    1.0
    """
    j = _check_degree(j)
    val = legendre_table(j, t)[j]
    return float(val) if np.ndim(val) == 0 else val


def legendre_integral_table(n, t):
    """Running integrals ``int_0^t P_j``, for ``j = 0..n``, stacked on axis 0."""
    n = _check_degree(n)
    p = legendre_table(n + 1, t)
    out = np.empty_like(p[: n + 1])
    # int_0^t P_0 = (P_1 + P_0) / 2 ; int_0^t P_j = (P_{j+1} - P_{j-1}) / (2(2j+1))
    out[0] = 0.5 * (p[1] + p[0])
    for j in range(1, n + 1):
        out[j] = (p[j + 1] - p[j - 1]) / (2.0 * (2 * j + 1))
    return out


def legendre_integral_eval(j, t):
    """Return ``int_0^t P_j(x) dx`` from the closed form in ``P_{j+1}``, ``P_{j-1}``."""
    j = _check_degree(j)
    val = legendre_integral_table(j, t)[j]
    return float(val) if np.ndim(val) == 0 else val


def _newton_root(k, x):
    """Refine a root of the classical Legendre polynomial ``L_k`` near ``x``."""
    for _ in range(_NEWTON_MAXITER):
        p_prev, p = 1.0, x
        for i in range(1, k):
            p_prev, p = p, ((2 * i + 1) * x * p - i * p_prev) / (i + 1)
        dp = k * (x * p - p_prev) / (x * x - 1.0)
        dx = p / dp
        x -= dx
        if p == 0.0 or abs(dx) <= 1e-16 * max(1.0, abs(x)):
            break
    else:
        raise RuntimeError(f"Newton iteration for Legendre root (k={k}) did not converge")
    p_prev, p = 1.0, x
    for i in range(1, k):
        p_prev, p = p, ((2 * i + 1) * x * p - i * p_prev) / (i + 1)
    dp = k * (x * p - p_prev) / (x * x - 1.0)
    if abs(p) > 1e-15 * max(1.0, abs(dp)):
        raise RuntimeError(f"Legendre root (k={k}) not resolved: |L_k| = {abs(p):.3e}")
    return x, dp


@lru_cache(maxsize=None)
def _gauss_cached(k):
    xs = np.empty(k)
    ws = np.empty(k)
    # roots in (0, 1] of L_k, largest first; mirrored to keep exact symmetry
    for i in range((k + 1) // 2):
        x0 = np.cos(np.pi * (i + 0.75) / (k + 0.5))
        if k % 2 == 1 and i == k // 2:
            x, dp = 0.0, _newton_root(k, 0.0)[1]
        else:
            x, dp = _newton_root(k, x0)
        w = 2.0 / ((1.0 - x * x) * dp * dp)
        xs[k - 1 - i], ws[k - 1 - i] = x, w
        xs[i], ws[i] = -x, w
    nodes = 0.5 * (1.0 + xs)
    weights = 0.5 * ws
    # absorb rounding into the central weight(s) so constants integrate to 1
    mid = [k // 2] if k % 2 else [k // 2 - 1, k // 2]
    rest = math.fsum(w for i, w in enumerate(weights) if i not in mid)
    weights[mid] = (1.0 - rest) / len(mid)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(k=k, nodes=nodes, weights=weights, precision=2 * k - 1)


def gauss_rule(k):
    """k-point Gauss-Legendre rule on [0, 1].

    Nodes are the roots of ``P_k``, found by Newton's method on the
    recurrence from Chebyshev-like starting values.

    Parameters
    ----------
    k : int
        Number of nodes, ``1 <= k <= 64``.

    Returns
    -------
    QuadratureRule
    """
    if int(k) != k or not 1 <= k <= MAX_NODES:
        raise ValueError(f"node count must be an integer in [1, {MAX_NODES}], got {k!r}")
    return _gauss_cached(int(k))
