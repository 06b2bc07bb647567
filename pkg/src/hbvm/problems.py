"""Test problems: harmonic oscillator, Kepler, quartic oscillator, linear decay.

Also the 2x2 map ``M_h = I + hJ - h^2 diag(1, 0)``, which is symplectic but
does not conserve the oscillator energy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import HamiltonianSystem, OdeSystem, canonical_j

KEPLER_MIN_R2 = 1e-28


class SingularityError(ArithmeticError):
    """State hit (or came within round-off of) a singularity of the Hamiltonian."""


@dataclass(frozen=True)
class ProblemInstance:
    system: object
    initial_state: np.ndarray
    period: Optional[float] = None
    reference: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    name: str = ""


def _rotation(t, y0):
    # exp(tJ) = cos(t) I + sin(t) J
    y0 = np.asarray(y0, dtype=float)
    q, p = y0[0], y0[1]
    c, s = np.cos(t), np.sin(t)
    return np.array([c * q + s * p, -s * q + c * p])


def harmonic_oscillator(y0=(1.0, 0.0)):
    """``H = (q^2 + p^2)/2``; the exact flow is a clockwise rotation with period 2*pi."""
    system = HamiltonianSystem(
        m=1,
        hamiltonian=lambda y: 0.5 * (y[0] ** 2 + y[1] ** 2),
        gradient=lambda y: np.asarray(y, dtype=float),
        polynomial_degree=2,
        name="harmonic",
    )
    return ProblemInstance(
        system=system,
        initial_state=np.array(y0, dtype=float),
        period=2.0 * np.pi,
        reference=_rotation,
        name="harmonic",
    )


def _kepler_r2(y):
    r2 = y[..., 0] ** 2 + y[..., 1] ** 2
    if np.any(r2 < KEPLER_MIN_R2):
        raise SingularityError("Kepler state at the origin (q1^2 + q2^2 < 1e-28)")
    return r2


def _kepler_h(y):
    y = np.asarray(y, dtype=float)
    r2 = _kepler_r2(y)
    return 0.5 * (y[..., 2] ** 2 + y[..., 3] ** 2) - 1.0 / np.sqrt(r2)


def _kepler_grad(y):
    y = np.asarray(y, dtype=float)
    r2 = _kepler_r2(y)
    inv3 = r2 ** -1.5
    g = np.empty_like(y)
    g[..., 0] = y[..., 0] * inv3
    g[..., 1] = y[..., 1] * inv3
    g[..., 2] = y[..., 2]
    g[..., 3] = y[..., 3]
    return g


def kepler_orbit(t, e):
    """Exact Kepler state at time ``t`` for the orbit started at pericentre.

    Solves Kepler's equation ``E - e sin E = t`` by Newton's method.
    """
    E = t if e < 0.8 else np.pi
    for _ in range(100):
        dE = (E - e * np.sin(E) - t) / (1.0 - e * np.cos(E))
        E -= dE
        if abs(dE) < 1e-15:
            break
    b = np.sqrt(1.0 - e * e)
    denom = 1.0 - e * np.cos(E)
    return np.array([
        np.cos(E) - e,
        b * np.sin(E),
        -np.sin(E) / denom,
        b * np.cos(E) / denom,
    ])


def kepler(e=0.0):
    """Kepler problem ``H = |p|^2/2 - 1/|q|`` with eccentricity ``e`` and period 2*pi."""
    if not 0.0 <= e < 1.0:
        raise ValueError(f"eccentricity must lie in [0, 1), got {e!r}")
    system = HamiltonianSystem(m=2, hamiltonian=_kepler_h, gradient=_kepler_grad, name=f"kepler(e={e:g})")
    y0 = np.array([1.0 - e, 0.0, 0.0, np.sqrt((1.0 + e) / (1.0 - e))])
    return ProblemInstance(
        system=system,
        initial_state=y0,
        period=2.0 * np.pi,
        reference=lambda t, _y0=None: kepler_orbit(t, e),
        name="kepler",
    )


def _quartic_grad(y):
    y = np.asarray(y, dtype=float)
    g = np.empty_like(y)
    g[..., 0] = y[..., 0] ** 3
    g[..., 1] = y[..., 1]
    return g


def quartic_oscillator(y0=(1.0, 0.0)):
    """``H = p^2/2 + q^4/4``, a degree-4 polynomial Hamiltonian."""
    system = HamiltonianSystem(
        m=1,
        hamiltonian=lambda y: 0.5 * y[1] ** 2 + 0.25 * y[0] ** 4,
        gradient=_quartic_grad,
        polynomial_degree=4,
        name="quartic",
    )
    return ProblemInstance(system=system, initial_state=np.array(y0, dtype=float), name="quartic")


def linear_decay(lam, y0=1.0):
    """Scalar test equation ``y' = lam * y``."""
    lam = float(lam)
    system = OdeSystem(dim=1, field=lambda y: lam * np.asarray(y, dtype=float), name=f"linear(lambda={lam:g})")
    return ProblemInstance(
        system=system,
        initial_state=np.array([float(y0)]),
        reference=lambda t, y: np.exp(lam * t) * np.asarray(y, dtype=float),
        name="linear",
    )


PROBLEMS = {
    "harmonic": harmonic_oscillator,
    "kepler": kepler,
    "quartic": quartic_oscillator,
}


def get_problem(name, **kwargs):
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(**kwargs)


def symplectic_demo_matrix(h):
    """``M_h = I + hJ - h^2 diag(1, 0)``."""
    return np.eye(2) + h * canonical_j(1) - h * h * np.array([[1.0, 0.0], [0.0, 0.0]])


def symplectic_demo_step(y, h):
    """Apply the first-order symplectic, non-conservative map ``M_h`` to ``y``."""
    return symplectic_demo_matrix(h) @ np.asarray(y, dtype=float)


def check_symplectic(M, atol=1e-15):
    """True when ``M^T J M = J`` entrywise within ``atol``."""
    M = np.asarray(M, dtype=float)
    J = canonical_j(M.shape[0] // 2)
    return bool(np.all(np.abs(M.T @ J @ M - J) <= atol))
