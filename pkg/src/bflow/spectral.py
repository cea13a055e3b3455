"""Fourier calculus for 1-periodic functions sampled on a uniform grid.

A grid field is a plain 1-D float array of even length ``N >= 8`` holding
samples at ``x_j = j / N``. The circle has circumference 1, so mode ``k``
has wavenumber ``2*pi*k`` and the Helmholtz operator ``A = I - d^2/dx^2``
has Fourier symbol ``1 + 4*pi^2*k^2``.
"""
from functools import lru_cache

import numpy as np

from .errors import InvalidFieldError

TWO_PI = 2.0 * np.pi


def check_field(u, name="field"):
    """Return ``u`` as a float array after validating the grid-field invariants."""
    arr = np.asarray(u, dtype=float)
    if arr.ndim != 1:
        raise InvalidFieldError(f"{name} must be one-dimensional, got shape {arr.shape}")
    n = arr.shape[0]
    if n < 8 or n % 2:
        raise InvalidFieldError(f"{name} needs an even number of samples >= 8, got {n}")
    if not np.all(np.isfinite(arr)):
        raise InvalidFieldError(f"{name} contains non-finite samples")
    return arr


@lru_cache(maxsize=None)
def grid(N):
    """Uniform collocation points ``j / N``."""
    x = np.arange(N) / N
    x.flags.writeable = False
    return x


@lru_cache(maxsize=None)
def _modes(N):
    k = np.arange(N // 2 + 1, dtype=float)
    k.flags.writeable = False
    return k


@lru_cache(maxsize=None)
def helmholtz_symbol(N):
    s = 1.0 + (TWO_PI * _modes(N)) ** 2
    s.flags.writeable = False
    return s


@lru_cache(maxsize=None)
def _derivative_symbol(N, order):
    s = (1j * TWO_PI * _modes(N)) ** order
    if order % 2:
        s[-1] = 0.0
    s.flags.writeable = False
    return s


@lru_cache(maxsize=None)
def _dealias_mask(N):
    m = _modes(N) <= N / 3.0
    m.flags.writeable = False
    return m


def _apply_symbol(u, symbol):
    return np.fft.irfft(np.fft.rfft(u) * symbol, u.shape[0])


def spectrum(u):
    """Return ``(k, coeffs)`` for ``k = -N/2 .. N/2-1`` with ``u = sum coeffs * exp(2 pi i k x)``."""
    u = check_field(u)
    N = u.shape[0]
    coeffs = np.fft.fftshift(np.fft.fft(u)) / N
    k = np.arange(-N // 2, N // 2)
    return k, coeffs


def from_spectrum(coeffs):
    """Inverse of :func:`spectrum`; returns the real part of the synthesized field."""
    coeffs = np.asarray(coeffs, dtype=complex)
    N = coeffs.shape[0]
    return np.fft.ifft(np.fft.ifftshift(coeffs) * N).real


def derivative(u, order=1):
    """Spectral derivative of order 1, 2 or 3; the Nyquist mode is dropped for odd orders."""
    u = check_field(u)
    if order not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order!r}")
    return _apply_symbol(u, _derivative_symbol(u.shape[0], order))


def helmholtz_apply(u):
    """``u - u_xx``."""
    u = check_field(u)
    return _apply_symbol(u, helmholtz_symbol(u.shape[0]))


def helmholtz_solve(m):
    """The unique periodic ``u`` with ``u - u_xx = m``."""
    m = check_field(m)
    return _apply_symbol(m, 1.0 / helmholtz_symbol(m.shape[0]))


def dealias(u):
    """Zero every mode with ``|k| > N/3`` (two-thirds rule)."""
    u = check_field(u)
    return _apply_symbol(u, _dealias_mask(u.shape[0]))


def product(a, b, dealiased=True):
    """Pointwise product, optionally with both factors and the result dealiased."""
    if not dealiased:
        return a * b
    return dealias(dealias(a) * dealias(b))


def integrate(u):
    """Periodic trapezoid rule, i.e. the sample mean."""
    return float(np.mean(check_field(u)))


def trig_coefficients(fields):
    """Weighted half-spectrum ``c`` with ``u(y) = Re sum_k c_k exp(2 pi i k y)``.

    ``fields`` may be a single field or a stack of shape ``(nf, N)``.
    """
    fields = np.asarray(fields, dtype=float)
    N = fields.shape[-1]
    c = np.fft.rfft(fields, axis=-1) / N
    c[..., 1 : N // 2] *= 2.0
    return c


def fourier_basis(y, K):
    """Matrix ``exp(2 pi i k y_m)`` for ``k = 0..K-1``.

    Built as an outer product of two tables of about ``sqrt(K)`` exponentials
    each, which keeps the cost near one complex multiply per entry.
    """
    y = np.asarray(y, dtype=float)
    B = max(1, int(np.ceil(np.sqrt(K))))
    nb = -(-K // B)
    phase = 1j * TWO_PI * y
    low = np.exp(np.multiply.outer(phase, np.arange(B)))
    high = np.exp(np.multiply.outer(phase, B * np.arange(nb)))
    basis = (high[:, :, None] * low[:, None, :]).reshape(y.shape[0], nb * B)
    return basis[:, :K]


def trig_evaluate(coeffs, targets):
    """Evaluate coefficients from :func:`trig_coefficients` at arbitrary real points."""
    targets = np.asarray(targets, dtype=float)
    y = np.mod(targets.ravel(), 1.0)
    out = (fourier_basis(y, coeffs.shape[-1]) @ coeffs.T).real
    if coeffs.ndim == 1:
        return out.reshape(targets.shape)
    return out.T.reshape((coeffs.shape[0],) + targets.shape)


def interpolate(u, targets):
    """Trigonometric interpolant of ``u`` evaluated at ``targets`` (reduced mod 1)."""
    u = check_field(u)
    targets = np.asarray(targets, dtype=float)
    if not np.all(np.isfinite(targets)):
        raise InvalidFieldError("interpolation targets must be finite")
    if targets.shape == u.shape and np.array_equal(targets, grid(u.shape[0])):
        # the interpolant reproduces the nodes exactly; skip the transform roundoff
        return u.copy()
    return trig_evaluate(trig_coefficients(u), targets)

