"""Eulerian form of the b-equation, ``u_t = -A^{-1}[u (Au)_x + b (Au) u_x]``.

``b = 2`` is Camassa-Holm, ``b = 3`` Degasperis-Procesi. Time stepping is
fixed-step RK4 on the pseudo-spectral semi-discretization. The integrator can
carry the flow map ``phi_t = u o phi`` alongside ``u`` so that the Lagrangian
diagnostics (conservation law, regularity identity, breaking) are available for
Eulerian runs too; tracking the flow does not change the ``u`` trajectory.
"""
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics, spectral
from .config import SolverConfig
from .diffeo import Diffeo, min_slope_of
from .errors import BlowUpError, MonotonicityLostError
from .stepping import rk4

DEFAULT_MAX_AMP = 1e3


def momentum(u):
    """``m = u - u_xx``."""
    return spectral.helmholtz_apply(u)


def euler_rhs(u, b, dealias=True):
    u = spectral.check_field(u)
    m = spectral.helmholtz_apply(u)
    q = spectral.product(u, spectral.derivative(m, 1), dealias) + b * spectral.product(
        m, spectral.derivative(u, 1), dealias
    )
    return -spectral.helmholtz_solve(q)


def connection_B(u, w, b, dealias=True):
    """Symmetric bilinear part of the connection; ``connection_B(u, u, b) == -euler_rhs(u, b)``."""
    u = spectral.check_field(u)
    w = spectral.check_field(w)
    mu, mw = spectral.helmholtz_apply(u), spectral.helmholtz_apply(w)
    ux, wx = spectral.derivative(u, 1), spectral.derivative(w, 1)
    mux, mwx = spectral.derivative(mu, 1), spectral.derivative(mw, 1)
    p = spectral.product
    q = p(u, mwx, dealias) + p(w, mux, dealias) + b * (p(mu, wx, dealias) + p(mw, ux, dealias))
    return 0.5 * spectral.helmholtz_solve(q)


@dataclass(frozen=True, eq=False)
class EulerianState:
    u: np.ndarray
    t: float = 0.0


def _check_amplitude(u, max_amp, t):
    if not np.all(np.isfinite(u)):
        raise BlowUpError(f"non-finite velocity at t={t:.6g}", t=t)
    amp = float(np.max(np.abs(u)))
    if amp > max_amp:
        raise BlowUpError(f"sup|u| = {amp:.3e} exceeds {max_amp:g} at t={t:.6g}", t=t)


def rk4_step(state, b, dt, dealias=True, max_amp=DEFAULT_MAX_AMP, source=None):
    """One classical RK4 step of ``u_t = euler_rhs(u, b) [+ source(t)]``."""
    if not dt > 0:
        raise ValueError("dt must be positive")

    def rhs(t, u):
        du = euler_rhs(u, b, dealias)
        return du if source is None else du + source(t)

    u = rk4(rhs, spectral.check_field(state.u), state.t, dt)
    t = state.t + dt
    _check_amplitude(u, max_amp, t)
    return EulerianState(u, t)


@dataclass
class EulerianRun:
    """Sampled Eulerian trajectory.

    ``flows`` and ``slope_trace`` (``(t, min phi_x)`` after every step) stay
    empty when the flow is not tracked.
    """

    states: list = field(default_factory=list)
    flows: list = field(default_factory=list)
    records: list = field(default_factory=list)
    slope_trace: list = field(default_factory=list)
    status: str = "completed"

    @property
    def times(self):
        return np.array([s.t for s in self.states])


def integrate_eulerian(u0, b, cfg=None, source=None, track_flow=True):
    """Fixed-step RK4 from ``u0`` to ``cfg.t_end``, sampling every ``cfg.sample_every`` steps.

    Raises :class:`BlowUpError` when sup|u| exceeds ``cfg.max_amp`` and, with
    ``track_flow``, :class:`MonotonicityLostError` when the flow map's slope
    reaches ``cfg.min_slope``. Either error carries the partial run.
    """
    cfg = SolverConfig() if cfg is None else cfg
    u = spectral.check_field(u0).copy()
    N = u.shape[0]
    x = spectral.grid(N)
    dt, dealias = cfg.dt, cfg.dealias
    m0 = momentum(u)
    run = EulerianRun()
    acc = diagnostics.RegularityAccumulator(m0, b) if track_flow else None

    def rhs(t, y):
        uu = y[:N]
        du = euler_rhs(uu, b, dealias)
        if source is not None:
            du = du + source(t)
        if not track_flow:
            return du
        return np.concatenate([du, spectral.interpolate(uu, x + y[N:])])

    def sample(t, uu, w):
        state = EulerianState(uu.copy(), t)
        run.states.append(state)
        if track_flow:
            phi = Diffeo(w)
            run.flows.append(phi)
            run.records.append(diagnostics.record(t, uu, phi, m0, b, acc))
        else:
            run.records.append(diagnostics.record(t, uu, None, m0, b, None))

    w = np.zeros(N)
    y = np.concatenate([u, w]) if track_flow else u
    if track_flow:
        acc.update(0.0, u, np.ones(N))
        run.slope_trace.append((0.0, 1.0))
    sample(0.0, u, w)
    t = 0.0
    n_steps = cfg.n_steps
    try:
        for n in range(1, n_steps + 1):
            y = rk4(rhs, y, t, dt)
            t = n * dt
            u = y[:N]
            _check_amplitude(u, cfg.max_amp, t)
            if track_flow:
                w = y[N:]
                phi = Diffeo(w)
                lowest = min_slope_of(phi)
                run.slope_trace.append((t, lowest))
                if not lowest > cfg.min_slope:
                    raise MonotonicityLostError(
                        f"flow map slope fell to {lowest:.3e} at t={t:.6g}", min_slope=lowest, t=t
                    )
                acc.update(t, spectral.interpolate(u, x + w), 1.0 + spectral.derivative(w, 1))
            if n % cfg.sample_every == 0 or n == n_steps:
                sample(t, u, w)
    except MonotonicityLostError as exc:
        run.status = "breaking-detected"
        exc.partial, exc.t = run, t if exc.t is None else exc.t
        raise
    except BlowUpError as exc:
        run.status = "blow-up"
        exc.partial = run
        raise
    return run
