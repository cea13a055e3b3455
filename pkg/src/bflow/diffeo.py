"""Orientation-preserving circle diffeomorphisms stored through their lifts.

A :class:`Diffeo` holds the lift ``f(x) = x + w(x) + offset`` where ``w`` is a
periodic grid field and ``offset`` an integer. Two lifts of the same circle map
differ only in ``offset``; nothing exported here depends on it except the raw
lift values.

Bracket convention, for reference: vector fields on the circle are functions
and the Lie bracket is ``[u, v] = u_x v - u v_x`` (opposite sign to the usual
bracket of vector fields). The solvers never use it.
"""
from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import MonotonicityLostError, NoConvergenceError

MIN_SLOPE = 1e-6
INVERT_TOL = 1e-13
INVERT_MAX_ITER = 100


@dataclass(frozen=True, eq=False)
class Diffeo:
    displacement: np.ndarray
    offset: int = 0

    def __post_init__(self):
        w = spectral.check_field(self.displacement, "displacement")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "displacement", w)
        object.__setattr__(self, "offset", int(self.offset))

    @classmethod
    def identity(cls, N):
        return cls(np.zeros(N))

    @classmethod
    def rotation(cls, N, c):
        return cls(np.full(N, float(c)))

    @property
    def N(self):
        return self.displacement.shape[0]

    def lift_values(self):
        """``f(x_j)`` on the grid."""
        return spectral.grid(self.N) + self.displacement + self.offset

    def lift_at(self, y):
        """Evaluate the lift at arbitrary points."""
        y = np.asarray(y, dtype=float)
        return y + spectral.interpolate(self.displacement, y) + self.offset

    def total_displacement(self):
        """``f - id`` including the integer offset."""
        return self.displacement + self.offset


def _slope_values(phi):
    return 1.0 + spectral.derivative(phi.displacement, 1)


def _guard(values, min_slope, what="slope"):
    lowest = float(np.min(values))
    if not lowest > min_slope:
        raise MonotonicityLostError(
            f"{what} fell to {lowest:.3e} (threshold {min_slope:g})", min_slope=lowest
        )


def slope(phi, min_slope=MIN_SLOPE):
    """``phi_x = 1 + w_x``; raises :class:`MonotonicityLostError` at or below ``min_slope``."""
    s = _slope_values(phi)
    _guard(s, min_slope)
    return s


def min_slope_of(phi):
    """Smallest grid value of ``phi_x`` without any guard."""
    return float(np.min(_slope_values(phi)))


def compose_field(u, phi):
    """``u o phi`` sampled on the grid."""
    return spectral.interpolate(u, phi.lift_values())


def compose(phi, psi, min_slope=MIN_SLOPE):
    """Lift of ``phi o psi``.

    Only the periodic displacement of ``phi`` is interpolated; the identity
    part composes exactly.
    """
    if phi.N != psi.N:
        raise ValueError("cannot compose diffeomorphisms on different grids")
    shifted = spectral.interpolate(phi.displacement, spectral.grid(psi.N) + psi.displacement)
    out = Diffeo(psi.displacement + shifted, phi.offset + psi.offset)
    slope(out, min_slope)
    return out


def solve_lift(phi, targets, tol=INVERT_TOL, max_iter=INVERT_MAX_ITER, min_slope=MIN_SLOPE):
    """Solve ``z + w(z) = target`` for each target by safeguarded Newton.

    ``w`` is the displacement of ``phi`` (the offset is handled by the caller).
    Newton steps that leave the current bracket are replaced by bisection.
    """
    slope(phi, min_slope)
    w = phi.displacement
    coeffs = spectral.trig_coefficients(np.stack([w, spectral.derivative(w, 1)]))
    targets = np.asarray(targets, dtype=float)
    # node extrema bound the interpolant only approximately; pad the bracket
    pad = 1e-2 + 0.1 * (np.max(w) - np.min(w))
    lo = targets - np.max(w) - pad
    hi = targets - np.min(w) + pad
    grid_w = w if targets.shape == w.shape else spectral.trig_evaluate(coeffs[0], targets)
    z = np.clip(targets - grid_w, lo, hi)
    for _ in range(max_iter):
        wz, dwz = spectral.trig_evaluate(coeffs, z)
        g = z + wz - targets
        lo = np.where(g < 0, z, lo)
        hi = np.where(g > 0, z, hi)
        dg = 1.0 + dwz
        with np.errstate(divide="ignore", invalid="ignore"):
            step = g / dg
        z_new = z - step
        bad = ~np.isfinite(z_new) | (z_new <= lo) | (z_new >= hi) | (dg <= 0)
        z_new = np.where(bad, 0.5 * (lo + hi), z_new)
        change = np.max(np.abs(z_new - z))
        z = z_new
        if change <= tol:
            return z
    raise NoConvergenceError(
        f"lift inversion did not converge in {max_iter} iterations (last change {change:.3e})",
        residual=float(change),
    )


def invert(phi, tol=INVERT_TOL, max_iter=INVERT_MAX_ITER, min_slope=MIN_SLOPE):
    """Lift of ``phi^{-1}``: per-node root find of ``f(y) = x_j``."""
    x = spectral.grid(phi.N)
    z = solve_lift(phi, x, tol=tol, max_iter=max_iter, min_slope=min_slope)
    return Diffeo(z - x, -phi.offset)


def _centered_difference(g, f):
    # derivative of g with respect to the lift f on the mapped, non-uniform mesh
    f_next = np.roll(f, -1)
    f_next[-1] += 1.0
    f_prev = np.roll(f, 1)
    f_prev[0] -= 1.0
    return (np.roll(g, -1) - np.roll(g, 1)) / (f_next - f_prev)


def conjugated_derivatives(u, phi, r, method="spectral", min_slope=MIN_SLOPE):
    """``a_k = (u o phi^{-1})^{(k)} o phi`` for ``k = 1..r`` without inverting ``phi``.

    Uses ``a_1 = u_x / phi_x`` and ``a_{k+1} = (a_k)_x / phi_x``. With
    ``method="fd2"`` every x-derivative is a second-order centered difference
    taken directly against the lift values.
    """
    u = spectral.check_field(u)
    if r not in (1, 2, 3):
        raise ValueError(f"r must be 1, 2 or 3, got {r!r}")
    if method == "spectral":
        s = slope(phi, min_slope)
        out, a = [], u
        for _ in range(r):
            a = spectral.derivative(a, 1) / s
            out.append(a)
        return out
    if method == "fd2":
        slope(phi, min_slope)
        f = phi.lift_values()
        out, a = [], u
        for _ in range(r):
            a = _centered_difference(a, f)
            out.append(a)
        return out
    raise ValueError(f"unknown derivative method {method!r}")


def chart_normalize(phi):
    """Move integer translates from the displacement into ``offset`` so ``w(0)`` lies in (-1/2, 1/2]."""
    n = int(np.ceil(phi.displacement[0] - 0.5))
    if n == 0:
        return phi
    return Diffeo(phi.displacement - n, phi.offset + n)


def compose_inverse(v, phi, min_slope=MIN_SLOPE):
    """``v o phi^{-1}`` on the grid, e.g. the Eulerian velocity of a Lagrangian field."""
    return spectral.interpolate(v, invert(phi, min_slope=min_slope).lift_values())
