"""Random smooth probes and two-sided residuals for structural checks.

Probes are low-mode trigonometric polynomials, so they are resolved on any
grid with ``N >= 16`` and interpolation error never masks what is measured.
"""
import numpy as np

from . import spectral
from .diffeo import Diffeo, compose, compose_field
from .geodesic import PStrategy, p_conjugated


def random_field(N, rng, amp=0.1, modes=2):
    """Trigonometric polynomial with modes ``1..modes``, scaled to sup-norm ``amp``."""
    x = spectral.grid(N)
    u = np.zeros(N)
    for k in range(1, modes + 1):
        a, c = rng.standard_normal(2) / k
        u += a * np.cos(2 * np.pi * k * x) + c * np.sin(2 * np.pi * k * x)
    return amp * u / np.max(np.abs(u))


def random_diffeo(N, rng, max_disp=0.1, max_tilt=0.5, modes=2):
    """Diffeo ``x + w`` with ``sup|w| <= max_disp`` and ``sup|w_x| <= max_tilt``.

    The size is drawn uniformly below the tighter of the two bounds, so the
    slope stays at least ``1 - max_tilt``.
    """
    w = random_field(N, rng, 1.0, modes)
    wx = spectral.derivative(w, 1)
    bound = min(max_disp / np.max(np.abs(w)), max_tilt / np.max(np.abs(wx)))
    return Diffeo(rng.uniform(0.2, 1.0) * bound * w)


def strategy_difference(phi, v, b, dealias=True):
    """sup-norm gap between the two realizations of ``P_phi(v)``."""
    a = p_conjugated(phi, v, b, PStrategy.INVERSE_COMPOSITION, dealias)
    c = p_conjugated(phi, v, b, PStrategy.CONJUGATED_OPERATOR, dealias)
    return float(np.max(np.abs(a - c)))


def equivariance_residual(phi, v, psi, b, strategy=PStrategy.INVERSE_COMPOSITION, dealias=True):
    """``sup|P_{phi o psi}(v o psi) - P_phi(v) o psi|``: right translation commutes with the geodesic field."""
    lhs = p_conjugated(compose(phi, psi), compose_field(v, psi), b, strategy, dealias)
    rhs = compose_field(p_conjugated(phi, v, b, strategy, dealias), psi)
    return float(np.max(np.abs(lhs - rhs)))
