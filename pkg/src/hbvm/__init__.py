"""Energy-preserving HBVM integrators, Miller's algorithm and stiffness diagnostics."""

from .core import HamiltonianSystem, OdeSystem, build_tableau, hbvm_step, solve_stages
from .driver import SolveOptions, Trajectory, integrate_adaptive, integrate_fixed
from .legendre import gauss_rule, legendre_eval
from .miller import LinearDifferenceEq, characteristic_roots, classify_roots, solve_bvp, solve_forward
from .problems import get_problem
from .stiffness import continuous_params_linear, discrete_params, well_represented

__version__ = "0.1.0"

__all__ = [
    "HamiltonianSystem",
    "OdeSystem",
    "build_tableau",
    "hbvm_step",
    "solve_stages",
    "SolveOptions",
    "Trajectory",
    "integrate_adaptive",
    "integrate_fixed",
    "gauss_rule",
    "legendre_eval",
    "LinearDifferenceEq",
    "characteristic_roots",
    "classify_roots",
    "solve_bvp",
    "solve_forward",
    "get_problem",
    "continuous_params_linear",
    "discrete_params",
    "well_represented",
]
