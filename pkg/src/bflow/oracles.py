"""Reference solutions and brute-force checks.

* rotations and constants (trivial, see :mod:`bflow.expmap`),
* the Degasperis-Procesi shock peakon
  ``u(t, x) = sinh(x - [x] - 1/2) / (t cosh(1/2) + c sinh(1/2))``,
* the Green's function of ``A = I - d^2/dx^2`` on the unit circle and
  convolution with it by Gauss quadrature,
* space-time weak residuals of the nonlocal DP form
  ``u_t + u u_x + d/dx G*(3/2 u^2) = 0`` against a battery of test functions,
* manufactured forcing for convergence tests of the forced Eulerian solver.

Discontinuous fields are only ever evaluated pointwise; every quadrature is
split at the integers where the peakon jumps.
"""
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import spectral
from .errors import QuadratureError
from .euler import euler_rhs

GAUSS_ORDER = 8
BATTERY_SCHEMA = "bflow-test-battery/1"
_BATTERY_KEYS = {"name", "modes", "bump_power", "poly"}


@dataclass(frozen=True)
class ShockPeakon:
    c: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError(f"shock peakon needs c > 0, got {self.c!r}")

    def denominator(self, t):
        return t * math.cosh(0.5) + self.c * math.sinh(0.5)

    def __call__(self, t, x):
        return shock_peakon_eval(self, t, x)


def shock_peakon_eval(p, t, x):
    """Peakon value; at integer ``x`` the mean of the one-sided limits, which is 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    x = np.asarray(x, dtype=float)
    frac = x - np.floor(x)
    out = np.sinh(frac - 0.5) / p.denominator(t)
    return np.where(frac == 0.0, 0.0, out)


def peakon_interior_momentum(p, t, x, h=1e-3):
    """``u - u_xx`` by a sixth-order centered difference; ``x`` must stay ``3h`` away from integers."""
    x = np.asarray(x, dtype=float)
    frac = x - np.floor(x)
    if np.any((frac < 3 * h) | (frac > 1 - 3 * h)):
        raise ValueError("stencil would cross the jump")
    w = (1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90)
    uxx = sum(c * shock_peakon_eval(p, t, x + (j - 3) * h) for j, c in enumerate(w)) / h**2
    return shock_peakon_eval(p, t, x) - uxx


def greens_kernel(x):
    """``G(x) = cosh(x - [x] - 1/2) / (2 sinh(1/2))``, so that ``G * m = A^{-1} m``."""
    x = np.asarray(x, dtype=float)
    return np.cosh(x - np.floor(x) - 0.5) / (2.0 * math.sinh(0.5))


def greens_function(N):
    """Samples of the Green's function on the ``N``-point grid."""
    return greens_kernel(spectral.grid(N))


def gauss_panels(a, b, panels, order=GAUSS_ORDER):
    """Nodes and weights of composite Gauss-Legendre on ``[a, b]``; ``a``, ``b`` may be arrays."""
    xi, wi = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    h = np.diff(edges)
    unit = (edges[:-1, None] + 0.5 * h[:, None] * (xi + 1.0)).ravel()
    unit_w = (0.5 * h[:, None] * wi).ravel()
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    return a + (b - a) * unit, (b - a) * unit_w


def convolve_callable(f, x, panels=64, order=GAUSS_ORDER):
    """``(G * f)(x) = int_0^1 G(s) f(x - s) ds`` for a 1-periodic callable ``f``.

    ``f`` may be discontinuous or kinked at the integers; the ``s`` integral
    is split at ``s = x - [x]`` so neither ``G`` nor ``f`` jumps inside a panel.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    frac = x - np.floor(x)
    total = np.zeros_like(frac)
    for a, b in ((0.0, frac), (frac, 1.0)):
        a = np.broadcast_to(a, frac.shape)
        b = np.broadcast_to(b, frac.shape)
        s, w = gauss_panels(a, b, panels, order)
        total += np.sum(w * greens_kernel(s) * f(frac[:, None] - s), axis=1)
    return total


def greens_convolve(f, panels=64, order=GAUSS_ORDER):
    """``G * f`` on the grid for a band-limited grid field, by quadrature of its interpolant."""
    f = spectral.check_field(f)
    coeffs = spectral.trig_coefficients(f)
    return convolve_callable(lambda y: spectral.trig_evaluate(coeffs, y), spectral.grid(f.shape[0]), panels, order)


def nonlocal_form_residual(u, b, panels=64):
    """Relative sup mismatch between ``A`` applied to the nonlocal b-family flux and the classical one.

    The nonlocal form is ``u_t + u u_x + d/dx G*(b/2 u^2 + (3-b)/2 u_x^2) = 0``;
    applying ``A`` must reproduce ``u m_x + b m u_x``. The convolution is done
    by quadrature, everything else spectrally, so this validates the weak form
    used for discontinuous solutions against the solver's equation.
    """
    u = spectral.check_field(u)
    ux = spectral.derivative(u, 1)
    m = spectral.helmholtz_apply(u)
    classical = u * spectral.derivative(m, 1) + b * m * ux
    flux = greens_convolve(0.5 * b * u * u + 0.5 * (3.0 - b) * ux * ux, panels)
    nonlocal_ = spectral.helmholtz_apply(u * ux + spectral.derivative(flux, 1))
    scale = max(float(np.max(np.abs(classical))), 1.0)
    return float(np.max(np.abs(nonlocal_ - classical))) / scale


@dataclass(frozen=True)
class TestFunction:
    """``psi(t, x) = (4 tau (1 - tau))^p * poly(tau) * sum_k (a_k cos 2 pi k x + b_k sin 2 pi k x)``.

    ``tau`` maps the time window onto [0, 1]; the bump power ``p >= 2``
    makes ``psi`` vanish to first order at both ends.
    """

    __test__ = False  # not a pytest class

    name: str
    modes: tuple
    bump_power: int = 3
    poly: tuple = (1.0,)

    def __post_init__(self):
        modes = tuple((int(k), float(a), float(b)) for k, a, b in self.modes)
        if not modes or any(k < 0 for k, _, _ in modes):
            raise ValueError(f"test function {self.name!r} needs nonnegative modes")
        if int(self.bump_power) < 2:
            raise ValueError("bump_power must be >= 2")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "bump_power", int(self.bump_power))
        object.__setattr__(self, "poly", tuple(float(c) for c in self.poly))

    def _time_factor(self, t, window):
        t0, t1 = window
        tau = (np.asarray(t, dtype=float) - t0) / (t1 - t0)
        p = self.bump_power
        bump = (4.0 * tau * (1.0 - tau)) ** p
        dbump = p * (4.0 * tau * (1.0 - tau)) ** (p - 1) * (4.0 - 8.0 * tau)
        poly = np.polynomial.Polynomial(self.poly)
        g = bump * poly(tau)
        dg = (dbump * poly(tau) + bump * poly.deriv()(tau)) / (t1 - t0)
        return g, dg

    def _space(self, x, smooth=None):
        # returns F, F_x and, if smooth is given, A^{-1} F_x
        x = np.asarray(x, dtype=float)
        F, Fx, GFx = 0.0, 0.0, 0.0
        for k, a, b in self.modes:
            th = 2.0 * np.pi * k * x
            c, s = np.cos(th), np.sin(th)
            F = F + a * c + b * s
            dx = 2.0 * np.pi * k * (b * c - a * s)
            Fx = Fx + dx
            GFx = GFx + dx / (1.0 + (2.0 * np.pi * k) ** 2)
        return F, Fx, GFx

    def evaluate(self, t, x, window):
        """``(psi_t, psi_x, A^{-1} psi_x)`` on the broadcast grid of ``t`` and ``x``."""
        g, dg = self._time_factor(t, window)
        F, Fx, GFx = self._space(x)
        return dg * F, g * Fx, g * GFx

    def as_dict(self):
        return {
            "name": self.name,
            "modes": [list(m) for m in self.modes],
            "bump_power": self.bump_power,
            "poly": list(self.poly),
        }


def battery_from_json(text):
    """Parse a test battery.

    Schema::

        {"schema": "bflow-test-battery/1",
         "functions": [{"name": str, "modes": [[k, a, b], ...],
                        "bump_power": int >= 2, "poly": [c0, c1, ...]}, ...]}
    """
    doc = json.loads(text)
    if not isinstance(doc, dict) or doc.get("schema") != BATTERY_SCHEMA:
        raise ValueError(f"test battery must declare schema {BATTERY_SCHEMA!r}")
    funcs = doc.get("functions")
    if not isinstance(funcs, list) or not funcs:
        raise ValueError("test battery needs a non-empty 'functions' list")
    out = []
    for entry in funcs:
        if not isinstance(entry, dict) or not {"name", "modes"} <= set(entry) <= _BATTERY_KEYS:
            raise ValueError(f"malformed test function entry: {entry!r}")
        out.append(TestFunction(**entry))
    return out


def battery_to_json(battery):
    doc = {"schema": BATTERY_SCHEMA, "functions": [f.as_dict() for f in battery]}
    return json.dumps(doc, indent=2) + "\n"


def load_battery(path=None):
    """Read a battery file; without a path, the ten-function battery shipped with the package."""
    if path is None:
        text = resources.files("bflow").joinpath("data/dp_battery.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return battery_from_json(text)


def weak_residual(u, battery, window, panels=(64, 32), order=GAUSS_ORDER, form="direct"):
    """``int int [u psi_t + u^2/2 psi_x + G*(3/2 u^2) psi_x] dx dt`` for each test function.

    ``u(t, x)`` is a vectorized callable, 1-periodic in ``x`` and possibly
    discontinuous at the integers. ``form="direct"`` convolves ``3/2 u^2``
    with ``G`` by quadrature; ``form="transposed"`` moves the (self-adjoint)
    convolution onto ``psi_x``, where it is exact for trigonometric ``psi``.
    """
    if form not in ("direct", "transposed"):
        raise ValueError(f"unknown weak form {form!r}")
    px, pt = panels
    t0, t1 = window
    if not t1 > t0:
        raise ValueError("empty time window")
    x, wx = gauss_panels(0.0, 1.0, px, order)
    t, wt = gauss_panels(t0, t1, pt, order)
    U = np.asarray(u(t[:, None], x[None, :]), dtype=float)
    if form == "direct":
        conv = np.stack([convolve_callable(lambda y, tk=tk: 1.5 * u(tk, y) ** 2, x, px, order) for tk in t])
    out = []
    for psi in battery:
        psi_t, psi_x, g_psi_x = psi.evaluate(t[:, None], x[None, :], window)
        if form == "direct":
            dens = U * psi_t + 0.5 * U * U * psi_x + conv * psi_x
        else:
            dens = U * psi_t + 0.5 * U * U * psi_x + 1.5 * U * U * g_psi_x
        out.append(float(wt @ dens @ wx))
    return np.array(out)


def dp_weak_residual(u, battery=None, t_window=(0.1, 0.9), panels=(64, 32), form="direct", rtol=1e-6, atol=1e-9):
    """Max over the battery of the absolute weak residual.

    The estimate is repeated with half the panels; if the two disagree by more
    than ``atol + rtol * max|I|`` refinement is not converging and
    :class:`QuadratureError` is raised.
    """
    battery = load_battery() if battery is None else battery
    fine = weak_residual(u, battery, t_window, panels, form=form)
    coarse = weak_residual(u, battery, t_window, (max(1, panels[0] // 2), max(1, panels[1] // 2)), form=form)
    change = float(np.max(np.abs(fine - coarse)))
    if change > atol + rtol * float(np.max(np.abs(fine))):
        raise QuadratureError(f"panel refinement changed the weak residual by {change:.3e}")
    return float(np.max(np.abs(fine)))


def manufactured_forcing(u_exact, b, N, u_t=None, h=1e-3, dealias=True):
    """Source ``f(t)`` making ``u_exact`` an exact solution of ``u_t = euler_rhs(u) + f``.

    ``u_exact(t, x)`` is vectorized in ``x``. Without an explicit ``u_t`` the
    time derivative is a fourth-order centered difference with step ``h``.
    """
    x = spectral.grid(N)

    def dudt(t):
        if u_t is not None:
            return np.asarray(u_t(t, x), dtype=float)
        f = lambda s: np.asarray(u_exact(s, x), dtype=float)  # noqa: E731
        return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)

    def source(t):
        u = np.asarray(u_exact(t, x), dtype=float) * np.ones(N)
        return dudt(t) - euler_rhs(u, b, dealias)

    return source
