"""Experiment drivers returning plain row dictionaries for the CLI."""

from __future__ import annotations

import math
from fractions import Fraction
from types import SimpleNamespace

import numpy as np

from .core import StageSolverOptions, build_tableau
from .driver import SolveOptions, integrate_adaptive, integrate_fixed, periodic_error
from .miller import LMMS, miller_example, solve_bvp, solve_forward, is_stable_at
from .problems import get_problem, kepler, linear_decay, quartic_oscillator, symplectic_demo_step
from .stiffness import continuous_params_linear, discrete_params, well_represented

# 2*pi as an unevaluated sum hi + lo
TWO_PI_HI = 6.283185307179586
TWO_PI_LO = 2.4492935982947064e-16


def default_nodes(system, r):
    """Quadrature nodes for HBVM(k, r) on ``system``.

    Polynomial Hamiltonians of degree nu get the smallest k with
    ``2k - 1 >= nu * r - 1``; anything else gets ``k = 4r``.
    """
    nu = getattr(system, "polynomial_degree", None)
    if nu:
        return max(r, math.ceil(nu * r / 2))
    return 4 * r


def offset_from_2pi(n, h):
    """``n * h - 2*pi`` without cancellation, for float ``h``."""
    return float(Fraction(h) * n - Fraction(TWO_PI_HI)) - TWO_PI_LO


def one_period_error(problem, r, h_nominal, k=None, stage_tol=0.0):
    """Fixed-step HBVM over one period (2*pi) with ``h = 2*pi / ceil(2*pi / h_nominal)``.

    The error is measured against the exact flow at the actual final time.

    Returns
    -------
    h, n_steps, error
    """
    system = problem.system
    y0 = problem.initial_state
    k = k or default_nodes(system, r)
    n = int(math.ceil(TWO_PI_HI / h_nominal))
    h = TWO_PI_HI / n
    traj = integrate_fixed(system, y0, h, n, build_tableau(k, r), StageSolverOptions(tol=stage_tol))
    ref = problem.reference(offset_from_2pi(n, h), y0)
    return h, n, float(np.linalg.norm(traj.states[-1] - ref))


def order_study(rs=(1, 2, 3), hs=(0.1, 0.05, 0.025, 0.0125), problems=(("harmonic", {}), ("kepler", {"e": 0.6}))):
    rows = []
    for name, kwargs in problems:
        problem = get_problem(name, **kwargs)
        for r in rs:
            k = default_nodes(problem.system, r)
            prev = None
            for hn in hs:
                h, n, err = one_period_error(problem, r, hn, k)
                order = None
                if prev is not None and err > 0 and prev[1] > 0:
                    order = math.log(prev[1] / err) / math.log(prev[0] / h)
                rows.append({"problem": problem.system.name, "r": r, "k": k, "h": h, "steps": n, "error": err, "observed_order": order})
                prev = (h, err)
    return rows


def kepler_runs(e=0.99, r=3, k=12, tol=1e-10, periods=10, initial_step=1e-3, include_gauss=True):
    """Adaptive HBVM(k, r) and, optionally, the Gauss method HBVM(r, r) over ``periods`` orbits.

    Returns ``{label: (trajectory, periods, errors)}``; empty when ``periods == 0``.
    """
    problem = kepler(e)
    P = problem.period
    out = {}
    if periods <= 0:
        return out
    methods = [(k, r)] + ([(r, r)] if include_gauss and k != r else [])
    opts = SolveOptions(initial_step=initial_step, tol=tol)
    for kk, rr in methods:
        tab = build_tableau(kk, rr)
        traj = integrate_adaptive(problem.system, problem.initial_state, periods * P, tab, opts, checkpoints=P * np.arange(1, periods + 1))
        ps, errs = periodic_error(traj, problem.initial_state, P)
        out[tab.label] = (traj, ps, errs)
    return out


def kepler_rows(runs):
    rows = []
    for label, (traj, ps, errs) in runs.items():
        drift = np.abs(traj.energy_drift())
        for n, err in zip(ps, errs):
            idx = int(np.argmin(np.abs(traj.times - n * 2 * np.pi)))
            rows.append({
                "method": label,
                "period": int(n),
                "error": float(err),
                "max_abs_dH": float(drift[: idx + 1].max()),
                "steps": idx,
            })
    return rows


def energy_demo(h=0.1, steps=100, r=3, e=0.99, tol=1e-10, periods=1):
    """Energy series for the non-conservative symplectic map, quartic HBVM, and Kepler."""
    rows = []
    y = np.array([1.0, 0.0])
    H0 = 0.5 * float(y @ y)
    for n in range(steps + 1):
        H = 0.5 * float(y @ y)
        rows.append({"series": "demo_map", "n": n, "t": n * h, "H": H, "dH": H - H0})
        y = symplectic_demo_step(y, h)
    if h > 0:
        quartic = quartic_oscillator()
        tab = build_tableau(2 * r, r)
        traj = integrate_fixed(quartic.system, quartic.initial_state, h, steps, tab)
        for n, (t, H) in enumerate(zip(traj.times, traj.energies)):
            rows.append({"series": f"quartic_{tab.label}", "n": n, "t": float(t), "H": float(H), "dH": float(H - traj.energies[0])})
    runs = kepler_runs(e=e, r=r, k=4 * r, tol=tol, periods=periods)
    for label, (traj, _, _) in runs.items():
        for n, (t, H) in enumerate(zip(traj.times, traj.energies)):
            rows.append({"series": f"kepler_{label}", "n": n, "t": float(t), "H": float(H), "dH": float(H - traj.energies[0])})
    return rows


def miller_rows(n_final=10):
    """Forward recursion, boundary value solution and exact ``2**-n sqrt(3)``."""
    eq = miller_example()
    y0 = math.sqrt(3.0)
    fwd = solve_forward(eq, [y0, 0.5 * y0], n_final)
    bvp = solve_bvp(eq, [y0], [0.0], n_final)
    return [
        {"n": n, "forward": float(fwd[n]), "bvp": float(bvp[n]), "exact": y0 * 2.0 ** -n}
        for n in range(n_final + 1)
    ]


def stability_rows(method="trapezoidal", re_range=(-3.0, 3.0), im_range=(-3.0, 3.0), n=61):
    lmm = LMMS[method]
    rows = []
    for im in np.linspace(im_range[0], im_range[1], n):
        for re in np.linspace(re_range[0], re_range[1], n):
            rows.append({"re_q": float(re), "im_q": float(im), "stable": int(is_stable_at(lmm, complex(re, im)))})
    return rows


def stiffness_report(lam=-1000.0, T=1.0, tol=1e-8, uniform_steps=10, r=2, rtol=0.1):
    """Continuous parameters against an adaptive HBVM(r, r) run and a uniform mesh."""
    problem = linear_decay(lam)
    cont = continuous_params_linear(lam, 1.0, T)
    tab = build_tableau(r, r)
    opts = SolveOptions(initial_step=min(1e-4, T), tol=tol)
    adaptive = integrate_adaptive(problem.system, problem.initial_state, T, tab, opts)
    rows = [dict(kind="continuous", steps=0, well_represented=True, **cont.as_dict())]
    disc = discrete_params(adaptive)
    rows.append(dict(kind=f"adaptive_{tab.label}", steps=adaptive.steps_accepted, well_represented=well_represented(cont, disc, rtol), **disc.as_dict()))
    # uniform mesh sampled from the exact solution: isolates the mesh from the integrator
    times = np.linspace(0.0, T, uniform_steps + 1)
    disc_u = discrete_params(SimpleNamespace(times=times, states=np.exp(lam * times)[:, None]))
    rows.append(dict(kind="uniform_exact_samples", steps=uniform_steps, well_represented=well_represented(cont, disc_u, rtol), **disc_u.as_dict()))
    return rows
