"""Lagrangian (geodesic) form of the b-equation on the circle diffeomorphism group.

Unknowns are the flow map ``phi`` and the Lagrangian velocity ``v = u o phi``:

    phi_t = v,    v_t = -P_phi(v),    P_phi = R_phi o P o R_{phi^{-1}},

with ``P(u) = A^{-1}[3 u_x u_xx + b (Au) u_x]``. Two independent realizations
of ``P_phi`` are provided:

``inverse-composition``
    invert ``phi`` numerically, apply the spectral ``P`` in Eulerian variables
    and compose back. Spectrally accurate; the default.

``conjugated-operator``
    never inverts ``phi``: the conjugated quadratic operator is assembled from
    ``a_1 = v_x / phi_x``, ``a_2 = (a_1)_x / phi_x`` and the conjugated
    Helmholtz operator ``w - (w_x / phi_x)_x / phi_x`` is inverted by a cyclic
    tridiagonal solve. Second-order finite differences throughout, so it is a
    cross-check rather than a production path.
"""
import enum
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics, spectral
from .config import SolverConfig
from .diffeo import (
    MIN_SLOPE,
    Diffeo,
    chart_normalize,
    compose_inverse,
    conjugated_derivatives,
    invert,
    min_slope_of,
    slope,
)
from .errors import BlowUpError, MonotonicityLostError
from .linalg import solve_cyclic_tridiagonal
from .stepping import rk4


class PStrategy(str, enum.Enum):
    INVERSE_COMPOSITION = "inverse-composition"
    CONJUGATED_OPERATOR = "conjugated-operator"


def p_operator(u, b, dealias=True):
    """``A^{-1}[3 u_x u_xx + b (Au) u_x]`` with dealiased products."""
    u = spectral.check_field(u)
    ux = spectral.derivative(u, 1)
    uxx = spectral.derivative(u, 2)
    m = spectral.helmholtz_apply(u)
    q = 3.0 * spectral.product(ux, uxx, dealias) + b * spectral.product(m, ux, dealias)
    return spectral.helmholtz_solve(q)


def _p_inverse_composition(phi, v, b, dealias, min_slope):
    psi = invert(phi, min_slope=min_slope)
    u = spectral.interpolate(v, psi.lift_values())
    return spectral.interpolate(p_operator(u, b, dealias), phi.lift_values())


def _p_conjugated_operator(phi, v, b, min_slope):
    a1, a2 = conjugated_derivatives(v, phi, 2, method="fd2", min_slope=min_slope)
    q = 3.0 * a1 * a2 + b * (v - a2) * a1
    f = phi.lift_values()
    f_next = np.roll(f, -1)
    f_next[-1] += 1.0
    f_prev = np.roll(f, 1)
    f_prev[0] -= 1.0
    dp, dm, dc = f_next - f, f - f_prev, 0.5 * (f_next - f_prev)
    lower = -1.0 / (dm * dc)
    upper = -1.0 / (dp * dc)
    diag = 1.0 - lower - upper
    return solve_cyclic_tridiagonal(lower, diag, upper, q)


def p_conjugated(phi, v, b, strategy=PStrategy.INVERSE_COMPOSITION, dealias=True, min_slope=MIN_SLOPE):
    """``P_phi(v) = (P(v o phi^{-1})) o phi``."""
    v = spectral.check_field(v, "v")
    strategy = PStrategy(strategy)
    if strategy is PStrategy.INVERSE_COMPOSITION:
        return _p_inverse_composition(phi, v, b, dealias, min_slope)
    return _p_conjugated_operator(phi, v, b, min_slope)


@dataclass(frozen=True, eq=False)
class GeodesicState:
    phi: Diffeo
    v: np.ndarray
    t: float = 0.0

    @classmethod
    def initial(cls, u0):
        u0 = spectral.check_field(u0)
        return cls(Diffeo.identity(u0.shape[0]), u0.copy(), 0.0)

    def eulerian_velocity(self):
        """``u = v o phi^{-1}``."""
        return compose_inverse(self.v, self.phi)


def geodesic_rhs(state, b, strategy=PStrategy.INVERSE_COMPOSITION, dealias=True, min_slope=MIN_SLOPE):
    """``(phi_t, v_t) = (v, -P_phi(v))``."""
    return state.v, -p_conjugated(state.phi, state.v, b, strategy, dealias, min_slope)


@dataclass
class GeodesicRun:
    """Sampled Lagrangian trajectory; ``eulerian`` holds ``v o phi^{-1}`` at each sample.

    ``slope_trace`` has ``(t, min phi_x)`` after every completed step.
    """

    states: list = field(default_factory=list)
    eulerian: list = field(default_factory=list)
    records: list = field(default_factory=list)
    slope_trace: list = field(default_factory=list)
    status: str = "completed"

    @property
    def times(self):
        return np.array([s.t for s in self.states])

    @property
    def final(self):
        return self.states[-1]


def integrate_geodesic(u0, b, cfg=None, record=True):
    """RK4 on ``(phi, v)`` from ``(id, u0)`` to ``cfg.t_end``.

    With ``record=False`` no diagnostics are computed and only the initial and
    final states are kept. Lifts are chart-normalized after every step.
    Raises :class:`MonotonicityLostError` (wave breaking) or
    :class:`BlowUpError`, each carrying the partial run.
    """
    cfg = SolverConfig() if cfg is None else cfg
    v = spectral.check_field(u0).copy()
    N = v.shape[0]
    strategy = PStrategy(cfg.strategy)
    m0 = spectral.helmholtz_apply(v)
    dt = cfg.dt
    offset = 0
    run = GeodesicRun()
    acc = diagnostics.RegularityAccumulator(m0, b) if record else None

    def rhs(t, y):
        phi = Diffeo(y[:N], offset)
        dphi, dv = geodesic_rhs(
            GeodesicState(phi, y[N:], t), b, strategy, cfg.dealias, cfg.min_slope
        )
        return np.concatenate([dphi, dv])

    def sample(state):
        run.states.append(state)
        if record:
            u = state.eulerian_velocity()
            run.eulerian.append(u)
            run.records.append(diagnostics.record(state.t, u, state.phi, m0, b, acc))

    y = np.concatenate([np.zeros(N), v])
    if record:
        acc.update(0.0, v, np.ones(N))
    sample(GeodesicState(Diffeo(y[:N]), y[N:].copy(), 0.0))
    run.slope_trace.append((0.0, 1.0))
    t = 0.0
    n_steps = cfg.n_steps
    try:
        for n in range(1, n_steps + 1):
            y = rk4(rhs, y, t, dt)
            t = n * dt
            if not np.all(np.isfinite(y)):
                raise BlowUpError(f"non-finite state at t={t:.6g}", t=t)
            amp = float(np.max(np.abs(y[N:])))
            if amp > cfg.max_amp:
                raise BlowUpError(f"sup|v| = {amp:.3e} exceeds {cfg.max_amp:g} at t={t:.6g}", t=t)
            phi = chart_normalize(Diffeo(y[:N], offset))
            offset = phi.offset
            y[:N] = phi.displacement
            run.slope_trace.append((t, min_slope_of(phi)))
            phi_x = slope(phi, cfg.min_slope)
            if record:
                acc.update(t, y[N:], phi_x)
            if record and (n % cfg.sample_every == 0 or n == n_steps):
                sample(GeodesicState(phi, y[N:].copy(), t))
        if not record:
            sample(GeodesicState(Diffeo(y[:N], offset), y[N:].copy(), t))
    except MonotonicityLostError as exc:
        run.status = "breaking-detected"
        exc.partial = run
        if exc.t is None:
            exc.t = t
        raise
    except BlowUpError as exc:
        run.status = "blow-up"
        exc.partial = run
        raise
    return run


def min_slope_trace(run):
    """``min phi_x`` at every sampled state of a run."""
    return np.array([min_slope_of(s.phi) for s in run.states])
