"""Exponential map of the b-equation connection at the identity.

``exp(u0)`` is the time-one flow map of the geodesic started at ``(id, u0)``.
Directional derivatives are central differences of that map, and
:func:`shoot` inverts it near the identity by matrix-free inexact Newton.
"""
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from . import spectral
from .config import SolverConfig
from .diffeo import Diffeo, chart_normalize
from .errors import MonotonicityLostError, NoConvergenceError
from .geodesic import integrate_geodesic

EPS_RANGE = (1e-7, 1e-3)
NEIGHBORHOOD_RADIUS = 0.1
INNER_RTOL = 1e-3
INNER_MAXITER = 50
MAX_BACKTRACKS = 8


def geodesic_endpoint(u0, b, cfg, t):
    """``phi(t)`` on the geodesic from ``(id, u0)``, stepping with ``cfg.dt``."""
    run = integrate_geodesic(u0, b, cfg.replace(t_end=float(t)), record=False)
    return run.final.phi


def exp_map(u0, b, cfg=None):
    """Time-one flow map of the geodesic with initial velocity ``u0``.

    Only ``cfg.dt``, the strategy, dealiasing and the guards are used; the end
    time is always 1.
    """
    cfg = SolverConfig() if cfg is None else cfg
    return geodesic_endpoint(spectral.check_field(u0), b, cfg, 1.0)


def dexp_jvp(u0, w, b, eps=1e-4, cfg=None):
    """``L(1, u0) w`` by a central difference of :func:`exp_map` in direction ``w``.

    Differences are taken on total displacements (lift minus identity), so
    chart offsets cancel.
    """
    lo, hi = EPS_RANGE
    if not lo <= eps <= hi:
        raise ValueError(f"eps must lie in [{lo:g}, {hi:g}], got {eps!r}")
    u0 = spectral.check_field(u0, "u0")
    w = spectral.check_field(w, "w")
    if u0.shape != w.shape:
        raise ValueError("u0 and w must live on the same grid")
    plus = exp_map(u0 + eps * w, b, cfg).total_displacement()
    minus = exp_map(u0 - eps * w, b, cfg).total_displacement()
    return (plus - minus) / (2.0 * eps)


@dataclass(frozen=True, eq=False)
class ShootingProblem:
    """Find ``u0`` with ``exp(u0) = target``.

    ``initial_guess`` defaults to the target's total displacement, which is
    the exact answer to first order.
    """

    target: Diffeo
    initial_guess: np.ndarray = None
    max_iters: int = 10
    tol: float = 1e-10

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        normal = chart_normalize(self.target)
        if normal.offset != self.target.offset:
            raise ValueError("target must be chart-normalized")
        if self.initial_guess is None:
            object.__setattr__(self, "initial_guess", self.target.total_displacement().copy())
        else:
            guess = spectral.check_field(self.initial_guess, "initial_guess")
            if guess.shape != self.target.displacement.shape:
                raise ValueError("initial guess and target live on different grids")
            object.__setattr__(self, "initial_guess", guess.copy())


@dataclass
class ShootingResult:
    u0: np.ndarray
    history: list  # (outer iteration, sup residual)

    @property
    def iterations(self):
        return self.history[-1][0]

    @property
    def residual(self):
        return self.history[-1][1]


def shoot(problem, b, cfg=None, eps=1e-5):
    """Inexact Newton for ``exp(u0) = target``.

    Each update solves ``L(1, u0) du = -r`` with GMRES (relative tolerance
    1e-3, at most 50 inner iterations), the matrix action coming from
    :func:`dexp_jvp`. Steps are halved while the trial geodesic breaks or the
    residual does not decrease; an initial guess whose geodesic breaks is
    replaced by ``u0 = 0``. Raises :class:`NoConvergenceError` carrying the
    iteration history if ``max_iters`` updates do not bring ``sup|r|`` below
    ``tol``.
    """
    cfg = SolverConfig() if cfg is None else cfg
    target = problem.target
    # rigid rotations are allowed; only the oscillating part must be small
    wobble = target.displacement - spectral.integrate(target.displacement)
    if np.max(np.abs(wobble)) > NEIGHBORHOOD_RADIUS:
        raise ValueError(
            f"target displacement varies by more than {NEIGHBORHOOD_RADIUS} "
            "(outside the probed neighborhood)"
        )
    goal = target.total_displacement()
    N = goal.shape[0]
    u = problem.initial_guess.copy()

    def residual(u):
        return exp_map(u, b, cfg).total_displacement() - goal

    def matvec(w):
        w = np.asarray(w, dtype=float).ravel()
        scale = float(np.max(np.abs(w)))
        if scale == 0.0:
            return np.zeros(N)
        return scale * dexp_jvp(u, w / scale, b, eps, cfg)

    try:
        r = residual(u)
    except MonotonicityLostError:
        u = np.zeros(N)
        r = -goal
    history = [(0, float(np.max(np.abs(r))))]
    for it in range(1, problem.max_iters + 1):
        if history[-1][1] <= problem.tol:
            return ShootingResult(u, history)
        jac = LinearOperator((N, N), matvec=matvec, dtype=float)
        du, _ = gmres(jac, -r, rtol=INNER_RTOL, atol=0.0, restart=INNER_MAXITER, maxiter=1)
        step = 1.0
        for _ in range(MAX_BACKTRACKS):
            try:
                r_new = residual(u + step * du)
            except MonotonicityLostError:
                step *= 0.5
                continue
            if np.max(np.abs(r_new)) < history[-1][1]:
                break
            step *= 0.5
        else:
            raise NoConvergenceError(
                f"shooting line search failed at iteration {it} (residual {history[-1][1]:.3e})",
                residual=history[-1][1],
                history=history,
            )
        u, r = u + step * du, r_new
        history.append((it, float(np.max(np.abs(r)))))
    if history[-1][1] <= problem.tol:
        return ShootingResult(u, history)
    raise NoConvergenceError(
        f"shooting did not reach {problem.tol:g} in {problem.max_iters} iterations "
        f"(final residual {history[-1][1]:.3e})",
        residual=history[-1][1],
        history=history,
    )
