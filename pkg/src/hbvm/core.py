"""One step of HBVM(k, r).

The curve through ``y0`` is

    omega(c) = y0 + h * sum_j gamma_j * int_0^c P_j,    c in [0, 1],

and the stage vectors solve the discretized Fourier conditions

    gamma_j = (2j + 1) * sum_l b_l P_j(c_l) f(omega(c_l)),   j = 0..r-1,

with ``(c_l, b_l)`` a k-point Gauss-Legendre rule.  HBVM(r, r) is the
r-stage Gauss collocation method; taking ``k > r`` adds "silent" stages that
make the quadrature exact for polynomial Hamiltonians of higher degree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .legendre import QuadratureRule, gauss_rule, legendre_integral_table, legendre_table, MAX_NODES


def apply_j(v):
    """Multiply by the canonical matrix ``J = [[0, I], [-I, 0]]`` along the last axis."""
    v = np.asarray(v, dtype=float)
    m = v.shape[-1] // 2
    return np.concatenate([v[..., m:], -v[..., :m]], axis=-1)


def canonical_j(m):
    """Dense ``2m x 2m`` canonical skew matrix."""
    eye = np.eye(m)
    zero = np.zeros((m, m))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class HamiltonianSystem:
    """Canonical Hamiltonian system ``y' = J grad H(y)`` with ``y = (q, p)``.

    ``gradient`` must accept arrays with arbitrary leading axes (the stage
    solver evaluates all quadrature nodes at once); ``hamiltonian`` only needs
    to handle a single state.
    """

    m: int
    hamiltonian: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    polynomial_degree: Optional[int] = None
    name: str = ""

    @property
    def dim(self):
        return 2 * self.m

    def vector_field(self, y):
        return apply_j(self.gradient(y))

    def energy(self, y):
        return float(self.hamiltonian(np.asarray(y, dtype=float)))


@dataclass(frozen=True)
class OdeSystem:
    """Plain autonomous system ``y' = f(y)``; the HBVM step applies unchanged."""

    dim: int
    field: Callable[[np.ndarray], np.ndarray]
    name: str = ""
    hamiltonian: Optional[Callable[[np.ndarray], float]] = None
    polynomial_degree: Optional[int] = None

    def vector_field(self, y):
        return np.asarray(self.field(y), dtype=float)

    def energy(self, y):
        if self.hamiltonian is None:
            return float("nan")
        return float(self.hamiltonian(np.asarray(y, dtype=float)))


@dataclass(frozen=True)
class HbvmTableau:
    """Cached basis data for HBVM(k, r).

    ``P_vals[j, l] = P_j(c_l)`` and ``I_vals[j, l] = int_0^{c_l} P_j`` for
    ``j < r`` and the ``k`` Gauss nodes ``c_l``.
    """

    r: int
    k: int
    rule: QuadratureRule
    P_vals: np.ndarray
    I_vals: np.ndarray
    eta: np.ndarray

    @property
    def order(self):
        return 2 * self.r

    @property
    def label(self):
        return f"HBVM({self.k},{self.r})"


@lru_cache(maxsize=None)
def build_tableau(k, r):
    """Precompute the basis values defining an HBVM(k, r) step."""
    if int(r) != r or int(k) != k:
        raise ValueError("k and r must be integers")
    k, r = int(k), int(r)
    if not 1 <= r <= k <= MAX_NODES:
        raise ValueError(f"need 1 <= r <= k <= {MAX_NODES}, got k={k}, r={r}")
    rule = gauss_rule(k)
    P = legendre_table(r - 1, rule.nodes)
    I = legendre_integral_table(r - 1, rule.nodes)
    eta = 2.0 * np.arange(r) + 1.0
    for a in (P, I, eta):
        a.setflags(write=False)
    return HbvmTableau(r=r, k=k, rule=rule, P_vals=P, I_vals=I, eta=eta)


@dataclass
class StageCoefficients:
    """Stage vectors ``gamma`` (shape ``(r, dim)``) and solver bookkeeping."""

    gamma: np.ndarray
    iterations: int = 0
    converged: bool = True
    residual: float = 0.0


@dataclass
class StepOutcome:
    y1: np.ndarray
    stages: StageCoefficients
    iterations: int
    converged: bool
    energy: float


@dataclass(frozen=True)
class StageSolverOptions:
    tol: float = 1e-14
    max_iter: int = 100


class StageConvergenceError(RuntimeError):
    """Fixed-point iteration for the stage vectors did not converge.

    Usually the step is too large for the iteration to contract.
    """

    def __init__(self, message, residual, iterations, stages=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.stages = stages


def _gamma_array(stages):
    if isinstance(stages, StageCoefficients):
        return np.asarray(stages.gamma, dtype=float)
    return np.asarray(stages, dtype=float)


def _node_states(gamma, y0, h, tableau):
    # shape (k, dim)
    return y0 + h * (tableau.I_vals.T @ gamma)


def _fourier_map(gamma, y0, h, system, tableau):
    F = np.asarray(system.vector_field(_node_states(gamma, y0, h, tableau)), dtype=float)
    weighted = tableau.P_vals * tableau.rule.weights
    return tableau.eta[:, None] * (weighted @ F)


def curve_eval(stages, y0, h, c, tableau):
    """Evaluate ``omega(t0 + c h)``.

    ``c`` may be a scalar or an array; for an array the result has shape
    ``c.shape + (dim,)``.
    """
    gamma = _gamma_array(stages)
    c_arr = np.asarray(c, dtype=float)
    if np.any((c_arr < 0.0) | (c_arr > 1.0)):
        raise ValueError("c must lie in [0, 1]")
    ints = legendre_integral_table(tableau.r - 1, c_arr)
    return np.asarray(y0, dtype=float) + h * np.tensordot(ints, gamma, axes=(0, 0))


def curve_derivative(stages, c, tableau):
    """``d omega / dt`` at ``t0 + c h``, i.e. ``sum_j gamma_j P_j(c)``."""
    gamma = _gamma_array(stages)
    vals = legendre_table(tableau.r - 1, np.asarray(c, dtype=float))
    return np.tensordot(vals, gamma, axes=(0, 0))


def stage_residual(stages, y0, h, system, tableau):
    """Residual ``gamma - G(gamma)`` of the discretized stage equations, shape ``(r, dim)``."""
    gamma = _gamma_array(stages)
    y0 = np.asarray(y0, dtype=float)
    return gamma - _fourier_map(gamma, y0, h, system, tableau)


def initial_guess(system, y0, tableau):
    """Explicit-Euler predictor: ``gamma_0 = f(y0)``, higher stages zero."""
    gamma = np.zeros((tableau.r, np.size(y0)))
    gamma[0] = system.vector_field(y0)
    return gamma


def solve_stages(system, y0, h, tableau, solver_opts=None, gamma0=None):
    """Solve the stage equations by fixed-point iteration.

    The iteration stops once the max-norm of the change in ``gamma`` falls
    below ``tol * (1 + |y0|_inf)``, or below a round-off floor of a few ulps
    of ``|gamma|``.

    Raises
    ------
    StageConvergenceError
        If ``max_iter`` iterations pass without meeting the criterion, or the
        iteration visibly diverges.
    """
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h!r}")
    opts = solver_opts or StageSolverOptions()
    y0 = np.asarray(y0, dtype=float)
    gamma = initial_guess(system, y0, tableau) if gamma0 is None else np.array(gamma0, dtype=float)
    scale = opts.tol * (1.0 + np.max(np.abs(y0)))
    first = None
    diff = np.inf
    for it in range(1, opts.max_iter + 1):
        new = _fourier_map(gamma, y0, h, system, tableau)
        diff = float(np.max(np.abs(new - gamma)))
        gamma = new
        floor = 8.0 * np.finfo(float).eps * float(np.max(np.abs(gamma)))
        if diff <= max(scale, floor):
            return StageCoefficients(gamma=gamma, iterations=it, converged=True, residual=diff)
        if first is None:
            first = diff
        if not np.isfinite(diff) or diff > 1e6 * max(first, scale):
            break
    raise StageConvergenceError(
        f"stage iteration failed after {it} iterations (h={h:.6g}, last change {diff:.3e})",
        residual=diff,
        iterations=it,
        stages=StageCoefficients(gamma=gamma, iterations=it, converged=False, residual=diff),
    )


def hbvm_step(system, y0, h, tableau, solver_opts=None):
    """Advance ``y0`` by one HBVM(k, r) step of size ``h``: ``y1 = y0 + h gamma_0``."""
    y0 = np.asarray(y0, dtype=float)
    stages = solve_stages(system, y0, h, tableau, solver_opts)
    y1 = y0 + h * stages.gamma[0]
    return StepOutcome(
        y1=y1,
        stages=stages,
        iterations=stages.iterations,
        converged=stages.converged,
        energy=system.energy(y1),
    )
