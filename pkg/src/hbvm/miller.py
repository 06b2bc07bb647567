"""Linear constant-coefficient difference equations solved as boundary value problems.

An equation ``sum_i a_i y_{n+i} = 0`` of order ``k`` whose characteristic
polynomial has ``k1`` roots inside and ``k2`` outside the unit circle is well
conditioned when ``k1`` values are imposed at the start and ``k2`` at the end
(Miller's algorithm).  The same root split defines absolute stability of a
linear multistep method used as a boundary value method.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded


class SingularSystemError(np.linalg.LinAlgError):
    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class LinearDifferenceEq:
    """``sum_{i=0}^{k} coeffs[i] * y_{n+i} = 0``; ``coeffs[k]`` must be nonzero."""

    coeffs: tuple
    label: str = ""

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("need at least two coefficients (order >= 1)")
        if c[-1] == 0:
            raise ValueError("leading coefficient a_k must be nonzero")
        object.__setattr__(self, "coeffs", tuple(c.tolist()))

    @property
    def order(self):
        return len(self.coeffs) - 1

    @property
    def array(self):
        return np.asarray(self.coeffs)

    @classmethod
    def from_recurrence(cls, *rhs, label=""):
        """Build ``y_{n+k} = rhs[0] y_{n+k-1} + ... + rhs[k-1] y_n``."""
        coeffs = [-c for c in reversed(rhs)] + [1.0]
        return cls(tuple(coeffs), label)


def miller_example():
    """``y_{n+2} = 100.5 y_{n+1} - 50 y_n``, roots 1/2 and 100."""
    return LinearDifferenceEq((50.0, -100.5, 1.0), label="y[n+2] = 100.5 y[n+1] - 50 y[n]")


def solve_forward(eq, initial, n_max):
    """Plain forward recursion; unstable whenever a root lies outside the unit circle."""
    a = eq.array
    k = eq.order
    initial = np.asarray(initial)
    if initial.shape != (k,):
        raise ValueError(f"need exactly {k} initial values")
    dtype = np.result_type(a, initial, float)
    y = np.empty(n_max + 1, dtype=dtype)
    m = min(k, n_max + 1)
    y[:m] = initial[:m]
    lead = a[-1]
    tail = a[:-1]
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(k, n_max + 1):
            y[n] = -np.dot(tail, y[n - k:n]) / lead
    return y


def solve_bvp(eq, initial, final, n_final):
    """Solve for ``y_0..y_N`` with ``k1`` leading and ``k2`` trailing values prescribed.

    The ``N + 1`` unknowns satisfy the ``N - k + 1`` recurrence rows plus the
    ``k`` boundary rows; the system has lower bandwidth ``k1`` and upper
    bandwidth ``k2`` and is solved by banded LU with partial pivoting.
    """
    a = eq.array
    k = eq.order
    initial = np.atleast_1d(np.asarray(initial))
    final = np.atleast_1d(np.asarray(final))
    k1, k2 = initial.size, final.size
    if k1 + k2 != k:
        raise ValueError(f"need k1 + k2 = {k}, got {k1} + {k2}")
    if n_final < k:
        raise ValueError(f"n_final must be >= k = {k}")
    N = int(n_final)
    dtype = np.result_type(a, initial, final, float)
    ab = np.zeros((k + 1, N + 1), dtype=dtype)  # row u + i - j holds A[i, j], u = k2
    rhs = np.zeros(N + 1, dtype=dtype)

    def put(i, j, v):
        ab[k2 + i - j, j] = v

    for i in range(k1):
        put(i, i, 1.0)
        rhs[i] = initial[i]
    for n in range(N - k + 1):
        for i in range(k + 1):
            put(k1 + n, n + i, a[i])
    for j in range(k2):
        row = N - k2 + 1 + j
        put(row, row, 1.0)
        rhs[row] = final[j]
    try:
        y = solve_banded((k1, k2), ab, rhs, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"boundary value system is singular: {exc}", _dense_cond(ab, k1, k2)) from exc
    if not np.all(np.isfinite(y)):
        raise SingularSystemError("boundary value system is singular", _dense_cond(ab, k1, k2))
    return y


def _dense_cond(ab, k1, k2):
    n = ab.shape[1]
    A = np.zeros((n, n), dtype=ab.dtype)
    for i in range(n):
        for j in range(max(0, i - k1), min(n, i + k2 + 1)):
            A[i, j] = ab[k2 + i - j, j]
    return float(np.linalg.cond(A))


def recurrence_residual(eq, y):
    """``sum_i a_i y_{n+i}`` for every admissible ``n``."""
    a = eq.array
    k = eq.order
    y = np.asarray(y)
    return np.array([np.dot(a, y[n:n + k + 1]) for n in range(len(y) - k)])


def characteristic_roots(eq):
    """Roots of ``sum_i a_i z^i`` as eigenvalues of the companion matrix."""
    a = eq.array
    k = eq.order
    if k == 1:
        return np.array([-a[0] / a[1]], dtype=complex)
    lead = a[-1]
    comp = np.zeros((k, k), dtype=np.result_type(a, complex))
    comp[0, :] = -a[-2::-1] / lead
    comp[1:, :-1] = np.eye(k - 1)
    return np.linalg.eigvals(comp).astype(complex)


@dataclass(frozen=True)
class RootClassification:
    roots: np.ndarray
    n_inside: int
    n_on: int
    n_outside: int
    tol: float


def classify_roots(roots, tol=1e-9):
    """Count roots strictly inside, on (within ``tol``), and outside the unit circle."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    roots = np.asarray(roots, dtype=complex)
    mod = np.abs(roots)
    inside = int(np.sum(mod < 1.0 - tol))
    outside = int(np.sum(mod > 1.0 + tol))
    return RootClassification(roots=roots, n_inside=inside, n_on=roots.size - inside - outside, n_outside=outside, tol=tol)


def is_absolutely_stable(cls, k1, k2):
    """(k1, k2) absolute stability: exactly ``k1`` roots inside, ``k2`` outside, none on the circle."""
    return cls.n_inside == k1 and cls.n_outside == k2 and cls.n_on == 0


def lmm_characteristic(rho_coeffs, sigma_coeffs, q):
    """Difference equation ``rho(E) - q sigma(E)`` from applying an LMM to ``y' = lambda y``, ``q = h lambda``."""
    rho = np.asarray(rho_coeffs, dtype=complex)
    sigma = np.asarray(sigma_coeffs, dtype=complex)
    if rho.shape != sigma.shape or rho.ndim != 1:
        raise ValueError("rho and sigma must have equal length k + 1")
    a = rho - q * sigma
    if abs(a[-1]) < 1e-14 * np.max(np.abs(a)):
        raise ValueError(f"degenerate leading coefficient at q = {q}")
    if np.all(a.imag == 0):
        a = a.real
    return LinearDifferenceEq(tuple(a.tolist()), label=f"rho - ({q})*sigma")


@dataclass(frozen=True)
class LinearMultistepMethod:
    name: str
    rho: tuple
    sigma: tuple
    k1: int
    k2: int


LMMS = {
    "trapezoidal": LinearMultistepMethod("trapezoidal", (-1.0, 1.0), (0.5, 0.5), k1=1, k2=0),
    "midpoint": LinearMultistepMethod("midpoint", (-1.0, 0.0, 1.0), (0.0, 2.0, 0.0), k1=1, k2=1),
}


def is_stable_at(method, q, tol=1e-9):
    try:
        eq = lmm_characteristic(method.rho, method.sigma, q)
    except ValueError:
        return False
    return is_absolutely_stable(classify_roots(characteristic_roots(eq), tol), method.k1, method.k2)


def stability_grid(method, re_values, im_values, tol=1e-9):
    """Absolute-stability flags on a rectangular grid; rows follow ``im``, columns ``re``."""
    flags = np.zeros((len(im_values), len(re_values)), dtype=bool)
    for i, y in enumerate(im_values):
        for j, x in enumerate(re_values):
            flags[i, j] = is_stable_at(method, complex(x, y), tol)
    return flags
