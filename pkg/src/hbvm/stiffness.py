"""Conditioning parameters kappa, gamma and sigma = kappa / gamma.

kappa is the sup of |y|, gamma the time-averaged |y|; a large sigma flags a
solution that decays fast relative to the integration interval (stiffness).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConditioningParams:
    kappa: float
    gamma: float
    sigma: float

    def as_dict(self):
        return {"kappa": self.kappa, "gamma": self.gamma, "sigma": self.sigma}


def _params(kappa, gamma):
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return ConditioningParams(kappa=float(kappa), gamma=float(gamma), sigma=float(kappa) / float(gamma))


def continuous_params_linear(lam, y0_abs, T):
    """Closed form for ``y = exp(lam t) y0`` on ``[0, T]`` with ``lam < 0``.

    ``gamma = (1 - exp(lam T)) / (T |lam|) * |y0|``.
    """
    if not lam < 0:
        raise ValueError("lambda must be negative")
    if not T > 0:
        raise ValueError("T must be positive")
    if not y0_abs > 0:
        raise ValueError("|y0| must be positive")
    x = lam * T
    return _params(y0_abs, -np.expm1(x) / (-x) * y0_abs)


def _trapezoid(values, times):
    return float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(times)))


def discrete_params_from_samples(times, values):
    """Parameters of scalar samples ``values[n]`` on the mesh ``times``."""
    times = np.asarray(times, dtype=float)
    mag = np.abs(np.asarray(values, dtype=float))
    if times.size < 2:
        raise ValueError("need at least two mesh points")
    duration = times[-1] - times[0]
    if not duration > 0:
        raise ValueError("trajectory has zero duration")
    return _params(mag.max(), _trapezoid(mag, times) / duration)


def discrete_params(traj, norm="component"):
    """Discrete conditioning parameters of a trajectory.

    Parameters
    ----------
    traj
        Anything with ``times`` (N+1,) and ``states`` (N+1, d).
    norm : {"component", "euclidean"}
        ``"component"`` computes sigma for every state component and reports
        the component with the largest sigma; ``"euclidean"`` uses ``|y_n|_2``.
    """
    states = np.asarray(traj.states, dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    if norm == "euclidean":
        return discrete_params_from_samples(traj.times, np.linalg.norm(states, axis=1))
    if norm != "component":
        raise ValueError(f"unknown norm {norm!r}")
    best = None
    for j in range(states.shape[1]):
        if not np.any(states[:, j]):
            continue
        p = discrete_params_from_samples(traj.times, states[:, j])
        if best is None or p.sigma > best.sigma:
            best = p
    if best is None:
        raise ValueError("trajectory is identically zero")
    return best


def well_represented(cont, disc, rtol=0.1):
    """True when kappa and gamma of the discrete solution match the continuous ones within ``rtol``."""
    if not rtol > 0:
        raise ValueError("rtol must be positive")
    return abs(cont.kappa - disc.kappa) <= rtol * cont.kappa and abs(cont.gamma - disc.gamma) <= rtol * cont.gamma
