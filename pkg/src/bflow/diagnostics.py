"""Run-time checks of the invariants of the b-equation flow.

* conservation law ``(m o phi) phi_x^b = m0`` along the flow map,
* the integrated regularity identity
  ``phi_xx = phi_x [int_0^t v phi_x ds - m0 int_0^t phi_x^(1-b) ds]``,
* H^1 energy (conserved only for b = 2) and the mean of u (conserved for all b),
* a fitted log-spectrum slope, used as a coarse proxy for the spatial
  regularity of the solution staying the same along the flow.

The v-version of the regularity identity (its time derivative) carries the same
information and is not accumulated separately.
"""
import math
from dataclasses import astuple, dataclass

import numpy as np

from . import spectral
from .diffeo import compose_inverse, min_slope_of
from .errors import DegenerateSpectrumError

CSV_HEADER = ("t", "cons_res", "h1", "mean_u", "min_slope", "decay_slope", "reg1_res")


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One row of monitored quantities; flow-based fields are NaN when no flow is tracked.

    ``decay_slope`` is NaN when the spectrum has too few resolved modes to fit.
    """

    t: float
    conservation_residual: float
    h1_energy: float
    mean_u: float
    min_slope: float
    decay_slope: float
    regularity1_residual: float

    def as_row(self):
        return astuple(self)


def h1_energy(u):
    """``integrate(u^2 + u_x^2)``."""
    u = spectral.check_field(u)
    ux = spectral.derivative(u, 1)
    return spectral.integrate(u * u + ux * ux)


def h1_energy_weak(u):
    """``integrate(u * A u)``; equals :func:`h1_energy` after integration by parts."""
    u = spectral.check_field(u)
    return spectral.integrate(u * spectral.helmholtz_apply(u))


def conservation_residual_fields(m, phi, m0, b):
    """sup over the grid of ``|(m o phi) phi_x^b - m0|`` for an Eulerian momentum ``m``."""
    s = 1.0 + spectral.derivative(phi.displacement, 1)
    transported = spectral.interpolate(m, phi.lift_values()) * s**b
    return float(np.max(np.abs(transported - m0)))


def conservation_residual(state, m0, b):
    """Residual of the conservation law for a Lagrangian state ``(phi, v)``."""
    u = compose_inverse(state.v, state.phi)
    return conservation_residual_fields(spectral.helmholtz_apply(u), state.phi, m0, b)


class RegularityAccumulator:
    """Trapezoid accumulators for ``int v phi_x ds`` and ``int phi_x^(1-b) ds``.

    Feed it every step point in order with :meth:`update`; the quadrature error
    is second order in the step size.
    """

    def __init__(self, m0, b):
        self.m0 = spectral.check_field(m0)
        self.b = b
        self.t = None
        self.i1 = np.zeros_like(self.m0)
        self.i2 = np.zeros_like(self.m0)
        self._last = None

    def update(self, t, v, phi_x):
        f1 = v * phi_x
        f2 = phi_x ** (1.0 - self.b)
        if self._last is not None:
            h = t - self.t
            self.i1 = self.i1 + 0.5 * h * (self._last[0] + f1)
            self.i2 = self.i2 + 0.5 * h * (self._last[1] + f2)
        self.t = t
        self._last = (f1, f2)

    def residual(self, phi):
        w = phi.displacement
        phi_x = 1.0 + spectral.derivative(w, 1)
        phi_xx = spectral.derivative(w, 2)
        return float(np.max(np.abs(phi_xx - phi_x * (self.i1 - self.m0 * self.i2))))


def regularity_identity_residual(samples, b):
    """Residual at the last of ``samples``, a sequence of ``(t, phi, v)`` at every step.

    ``samples[0]`` must be the initial state with ``phi = id``.
    """
    samples = list(samples)
    _, _, v0 = samples[0]
    acc = RegularityAccumulator(spectral.helmholtz_apply(v0), b)
    for t, phi, v in samples:
        acc.update(t, v, 1.0 + spectral.derivative(phi.displacement, 1))
    return acc.residual(samples[-1][1])


def spectral_decay_slope(u, floor=1e-14, min_modes=8):
    """Least-squares slope of ``log|u_hat(k)|`` against ``k`` over ``4 <= k <= N/3``.

    Only modes above ``floor`` enter the fit.
    """
    u = spectral.check_field(u)
    N = u.shape[0]
    mag = np.abs(np.fft.rfft(u)) / N
    k = np.arange(mag.shape[0])
    keep = (k >= 4) & (k <= N / 3) & (mag > floor)
    if np.count_nonzero(keep) < min_modes:
        raise DegenerateSpectrumError(
            f"only {np.count_nonzero(keep)} modes above {floor:g} in the fit band"
        )
    slope, _ = np.polyfit(k[keep], np.log(mag[keep]), 1)
    return float(slope)


def record(t, u, phi, m0, b, acc=None):
    """Build a :class:`DiagnosticsRecord` for Eulerian velocity ``u`` and flow map ``phi``."""
    try:
        decay = spectral_decay_slope(u)
    except DegenerateSpectrumError:
        decay = math.nan
    if phi is None:
        cons, lowest = math.nan, math.nan
    else:
        cons = conservation_residual_fields(spectral.helmholtz_apply(u), phi, m0, b)
        lowest = min_slope_of(phi)
    reg = acc.residual(phi) if (acc is not None and phi is not None) else math.nan
    return DiagnosticsRecord(
        t=float(t),
        conservation_residual=cons,
        h1_energy=h1_energy(u),
        mean_u=spectral.integrate(u),
        min_slope=lowest,
        decay_slope=decay,
        regularity1_residual=reg,
    )
