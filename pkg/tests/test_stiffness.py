import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hbvm.core import build_tableau
from hbvm.driver import SolveOptions, integrate_adaptive
from hbvm.problems import linear_decay
from hbvm.stiffness import (
    ConditioningParams,
    continuous_params_linear,
    discrete_params,
    discrete_params_from_samples,
    well_represented,
)


def test_continuous_stiff():
    p = continuous_params_linear(-1000.0, 1.0, 1.0)
    assert p.kappa == 1.0
    assert p.gamma == pytest.approx(1e-3, rel=1e-12)
    assert p.sigma == pytest.approx(1000.0, rel=1e-12)


def test_continuous_mild():
    p = continuous_params_linear(-1.0, 1.0, 1.0)
    assert p.sigma == pytest.approx(1 / (1 - math.exp(-1)), rel=1e-14)
    assert p.sigma == pytest.approx(1.5820, abs=1e-4)


def test_continuous_limit_to_constant():
    assert continuous_params_linear(-1e-12, 2.0, 1.0).sigma == pytest.approx(1.0, abs=1e-11)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (1.0, 1.0, 1.0), (-1.0, 1.0, 0.0), (-1.0, 0.0, 1.0)])
def test_continuous_rejects(args):
    with pytest.raises(ValueError):
        continuous_params_linear(*args)


@pytest.mark.parametrize("tl", [100.0, 1e3, 1e5])
def test_sigma_approaches_t_lambda(tl):
    p = continuous_params_linear(-tl, 1.0, 1.0)
    assert abs(p.sigma - tl) / tl <= 0.02


def test_discrete_constant():
    p = discrete_params(SimpleNamespace(times=np.linspace(0, 2, 5), states=np.full((5, 1), -3.0)))
    assert p.kappa == 3.0 and p.gamma == pytest.approx(3.0) and p.sigma == pytest.approx(1.0)


def test_discrete_two_points():
    p = discrete_params_from_samples([0.0, 1.0], [1.0, 0.0])
    assert p.gamma == 0.5 and p.sigma == 2.0


def test_discrete_component_max():
    times = np.linspace(0, 1, 101)
    states = np.stack([np.ones_like(times), np.exp(-20 * times)], axis=1)
    p = discrete_params(SimpleNamespace(times=times, states=states))
    assert p.sigma > 15
    pe = discrete_params(SimpleNamespace(times=times, states=states), norm="euclidean")
    assert pe.sigma < p.sigma
    with pytest.raises(ValueError):
        discrete_params(SimpleNamespace(times=times, states=states), norm="bogus")


def test_discrete_rejects_zero_duration():
    with pytest.raises(ValueError):
        discrete_params_from_samples([1.0, 1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        discrete_params_from_samples([1.0], [1.0])


def test_well_represented_examples():
    c = ConditioningParams(1.0, 0.01, 100.0)
    assert well_represented(c, c)
    assert not well_represented(c, ConditioningParams(1.0, 0.02, 50.0))
    with pytest.raises(ValueError):
        well_represented(c, c, rtol=0)


def test_adaptive_run_well_represented():
    lam = -1000.0
    problem = linear_decay(lam)
    cont = continuous_params_linear(lam, 1.0, 1.0)
    traj = integrate_adaptive(problem.system, problem.initial_state, 1.0, build_tableau(2, 2), SolveOptions(initial_step=1e-4, tol=1e-8))
    disc = discrete_params(traj)
    assert abs(disc.sigma - cont.sigma) <= 0.05 * cont.sigma
    assert well_represented(cont, disc)
    coarse = np.linspace(0, 1, 11)
    disc_c = discrete_params_from_samples(coarse, np.exp(lam * coarse))
    assert not well_represented(cont, disc_c)


def test_refinement_moves_sigma_toward_continuous():
    lam = -50.0
    cont = continuous_params_linear(lam, 1.0, 1.0).sigma
    gaps = []
    for n in (10, 100, 1000):
        t = np.linspace(0, 1, n + 1)
        gaps.append(abs(discrete_params_from_samples(t, np.exp(lam * t)).sigma - cont))
    assert gaps[0] > gaps[1] > gaps[2]


@given(st.floats(min_value=-1e4, max_value=-1e-3), st.floats(min_value=1e-3, max_value=1e3), st.floats(min_value=1e-3, max_value=1e3))
def test_sigma_scale_invariant_continuous(lam, y0, c):
    a = continuous_params_linear(lam, y0, 1.0)
    b = continuous_params_linear(lam, c * y0, 1.0)
    assert b.sigma == pytest.approx(a.sigma, rel=1e-14)
    assert a.sigma == pytest.approx(a.kappa / a.gamma, rel=1e-14)
    assert a.sigma >= 1 - 1e-12


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_sigma_scale_invariant_discrete(c):
    t = np.linspace(0, 1, 31)
    y = np.exp(-7 * t)
    a = discrete_params_from_samples(t, y)
    b = discrete_params_from_samples(t, c * y)
    assert b.sigma == pytest.approx(a.sigma, rel=1e-14)
