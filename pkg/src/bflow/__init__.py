"""Pseudo-spectral Eulerian and geodesic solvers for the b-equation on the circle."""
from .config import SolverConfig
from .diffeo import Diffeo
from .errors import (
    BFlowError,
    BlowUpError,
    InvalidConfigError,
    MonotonicityLostError,
    NoConvergenceError,
)
from .euler import integrate_eulerian
from .expmap import dexp_jvp, exp_map, shoot
from .geodesic import PStrategy, integrate_geodesic

__version__ = "0.1.0"
