"""Fixed-step and adaptive time marching with HBVM(k, r).

Step-size control uses step doubling: one step of size ``h`` is compared
with two steps of size ``h/2`` and the difference is scaled by the
Richardson factor ``2**(2r) - 1``.  The two-half-steps value is kept (no
local extrapolation), so the advancing method is still HBVM(k, r).

State updates use compensated summation so round-off does not swamp
the truncation error of high-order methods at small step sizes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import StageConvergenceError, StageSolverOptions, solve_stages

logger = logging.getLogger(__name__)


class IntegrationError(RuntimeError):
    """Integration aborted; ``trajectory`` holds the part computed so far."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class SolveOptions:
    initial_step: float = 1e-2
    tol: float = 1e-10
    h_min: float = 1e-12
    h_max: float = np.inf
    safety: float = 0.9
    shrink_min: float = 0.2
    grow_max: float = 5.0
    max_steps: int = 1_000_000
    stage_tol: float = 1e-14
    stage_max_iter: int = 100

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.h_min <= self.initial_step <= self.h_max:
            raise ValueError("need 0 < h_min <= initial_step <= h_max")
        if not 0 < self.shrink_min <= 1 <= self.grow_max:
            raise ValueError("need 0 < shrink_min <= 1 <= grow_max")
        if not 0 < self.safety <= 1:
            raise ValueError("safety must lie in (0, 1]")

    @property
    def stage_options(self):
        return StageSolverOptions(tol=self.stage_tol, max_iter=self.stage_max_iter)


@dataclass
class Trajectory:
    """Discrete solution ``{(t_n, y_n)}`` with energies and solver counters."""

    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    steps_accepted: int = 0
    steps_rejected: int = 0
    stage_iterations_total: int = 0
    method: str = ""

    @property
    def step_sizes(self):
        return np.diff(self.times)

    def energy_drift(self):
        """``H(y_n) - H(y_0)`` along the mesh."""
        return self.energies - self.energies[0]


class _Builder:
    """Accumulates mesh points; keeps a compensation term for the state."""

    def __init__(self, system, t0, y0, method):
        self.system = system
        self.times = [float(t0)]
        self.states = [np.array(y0, dtype=float)]
        self.energies = [system.energy(y0)]
        self.comp = np.zeros_like(self.states[0])
        self.accepted = 0
        self.rejected = 0
        self.iterations = 0
        self.method = method

    @property
    def t(self):
        return self.times[-1]

    @property
    def y(self):
        return self.states[-1]

    def push(self, t, y, comp):
        self.times.append(float(t))
        self.states.append(y)
        self.energies.append(self.system.energy(y))
        self.comp = comp
        self.accepted += 1

    def build(self):
        return Trajectory(
            times=np.array(self.times),
            states=np.array(self.states),
            energies=np.array(self.energies),
            steps_accepted=self.accepted,
            steps_rejected=self.rejected,
            stage_iterations_total=self.iterations,
            method=self.method,
        )


def _kahan_add(y, comp, delta):
    s = delta + comp
    y_new = y + s
    return y_new, s - (y_new - y)


def _substep(system, y, comp, h, tableau, stage_opts):
    """One HBVM step from the compensated state ``(y, comp)``."""
    stages = solve_stages(system, y, h, tableau, stage_opts)
    y1, comp1 = _kahan_add(y, comp, h * stages.gamma[0])
    return y1, comp1, stages.iterations


def integrate_fixed(system, y0, h, n_steps, tableau, solver_opts=None, t0=0.0):
    """March ``n_steps`` uniform HBVM steps of size ``h`` from ``y0``.

    Raises
    ------
    IntegrationError
        On stage non-convergence; the partial trajectory is attached.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    if int(n_steps) != n_steps or n_steps < 1:
        raise ValueError("n_steps must be a positive integer")
    b = _Builder(system, t0, y0, tableau.label)
    for n in range(1, int(n_steps) + 1):
        try:
            y1, comp, its = _substep(system, b.y, b.comp, h, tableau, solver_opts)
        except StageConvergenceError as exc:
            b.iterations += exc.iterations
            raise IntegrationError(f"step {n} at t={b.t:.6g}: {exc}", b.build()) from exc
        b.iterations += its
        b.push(t0 + n * h, y1, comp)
    return b.build()


def _doubling(system, y, comp, h, tableau, stage_opts):
    coarse, comp_coarse, it0 = _substep(system, y, comp, h, tableau, stage_opts)
    mid, comp_mid, it1 = _substep(system, y, comp, 0.5 * h, tableau, stage_opts)
    fine, comp_fine, it2 = _substep(system, mid, comp_mid, 0.5 * h, tableau, stage_opts)
    diff = (coarse - fine) + (comp_coarse - comp_fine)
    err = float(np.max(np.abs(diff))) / (2.0 ** (2 * tableau.r) - 1.0)
    return fine, comp_fine, err, it0 + it1 + it2


def estimate_local_error(system, y, h, tableau, solver_opts=None):
    """Step-doubling estimate of the local error of one step of size ``h``.

    Returns
    -------
    y_fine : ndarray
        Result of two half steps.
    err : float
        ``max|y_h - y_{h/2}| / (2**(2r) - 1)`` (max-norm).
    """
    if not h > 0:
        raise ValueError("h must be positive")
    y = np.asarray(y, dtype=float)
    fine, _, err, _ = _doubling(system, y, np.zeros_like(y), h, tableau, solver_opts)
    return fine, err


def _factor(err, opts, expo):
    if err == 0.0:
        return opts.grow_max
    return min(opts.grow_max, max(opts.shrink_min, opts.safety * (opts.tol / err) ** expo))


def integrate_adaptive(system, y0, t_end, tableau, opts=None, checkpoints=()):
    """Adaptive integration on ``[0, t_end]`` with step doubling.

    Steps are shortened so that the mesh contains every time in
    ``checkpoints`` (and ``t_end``) exactly.  A step whose stage iteration
    fails is rejected and retried with half the step size.

    Raises
    ------
    IntegrationError
        When the error test fails at ``h_min`` or ``max_steps`` is exceeded.
    """
    opts = opts or SolveOptions()
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    stops = sorted({float(c) for c in checkpoints if 0 < c < t_end} | {float(t_end)})
    stage_opts = opts.stage_options
    expo = 1.0 / (2 * tableau.r + 1)
    b = _Builder(system, 0.0, y0, tableau.label)
    h = opts.initial_step
    stop_idx = 0
    attempts = 0
    while stop_idx < len(stops):
        target = stops[stop_idx]
        remaining = target - b.t
        clipped = False
        if h >= remaining - opts.h_min:
            # land on the checkpoint without leaving a sliver shorter than h_min
            h_try = remaining if remaining <= opts.h_max else 0.5 * remaining
            clipped = h_try == remaining
        else:
            h_try = h
        attempts += 1
        if b.accepted >= opts.max_steps or attempts > 20 * opts.max_steps:
            raise IntegrationError(f"max_steps={opts.max_steps} exceeded at t={b.t:.6g}", b.build())
        try:
            fine, comp, err, its = _doubling(system, b.y, b.comp, h_try, tableau, stage_opts)
        except StageConvergenceError as exc:
            b.iterations += exc.iterations
            b.rejected += 1
            if h_try <= opts.h_min:
                raise IntegrationError(f"stage iteration fails at h_min, t={b.t:.6g}: {exc}", b.build()) from exc
            h = max(opts.h_min, 0.5 * h_try)
            continue
        b.iterations += its
        if err <= opts.tol:
            b.push(target if clipped else b.t + h_try, fine, comp)
            if clipped:
                stop_idx += 1
            if not clipped:
                # a clipped step says nothing about the natural step size
                factor = _factor(err, opts, expo)
                h = min(opts.h_max, max(opts.h_min, h_try * factor))
        else:
            b.rejected += 1
            if h_try <= opts.h_min:
                raise IntegrationError(
                    f"error test failed at h_min={opts.h_min:g}, t={b.t:.6g} (err={err:.3e})", b.build()
                )
            h = max(opts.h_min, h_try * min(1.0, _factor(err, opts, expo)))
    return b.build()


def periodic_error(traj, y0, period, rtol=1e-9):
    """Deviation ``|y(nP) - y0|`` at every completed period ``n >= 1``.

    Returns
    -------
    periods : ndarray of int
    errors : ndarray of float
    """
    y0 = np.asarray(y0, dtype=float)
    n_done = int(np.floor(traj.times[-1] / period * (1 + rtol)))
    periods = np.arange(1, n_done + 1)
    errors = np.empty(n_done)
    for i, n in enumerate(periods):
        t = n * period
        idx = int(np.argmin(np.abs(traj.times - t)))
        if abs(traj.times[idx] - t) > rtol * max(1.0, t):
            raise ValueError(f"trajectory has no mesh point at t = {n} * period")
        errors[i] = np.linalg.norm(traj.states[idx] - y0)
    return periods, errors


def power_law_exponent(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
