import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bflow import oracles, spectral
from bflow.errors import QuadratureError
from bflow.probes import random_field

PI = np.pi


def sup(a):
    return float(np.max(np.abs(a)))


class TestShockPeakon:
    def test_examples(self):
        p = oracles.ShockPeakon(1.0)
        assert p(0.0, 0.5) == 0.0
        assert p(0.0, 1e-12) == pytest.approx(-1.0, abs=1e-11)
        assert p(0.0, 1 - 1e-12) == pytest.approx(1.0, abs=1e-11)
        assert abs(p(1e9, 0.2)) < 1e-9

    def test_value_at_the_jump_is_the_mean(self):
        p = oracles.ShockPeakon(2.0)
        assert np.all(oracles.shock_peakon_eval(p, 0.3, np.array([-1.0, 0.0, 1.0, 4.0])) == 0.0)

    def test_closed_form(self):
        p = oracles.ShockPeakon(0.7)
        t, x = 0.4, 2.3
        expected = math.sinh(0.3 - 0.5) / (t * math.cosh(0.5) + 0.7 * math.sinh(0.5))
        assert p(t, x) == pytest.approx(expected, rel=1e-14)

    @given(st.floats(0.01, 10), st.floats(0, 5), st.floats(0.001, 0.499))
    @settings(max_examples=50, deadline=None)
    def test_antisymmetric_about_half(self, c, t, s):
        p = oracles.ShockPeakon(c)
        # 0.5 + s and 0.5 - s are rounded separately, so allow a few ulp of the value
        assert p(t, 0.5 + s) == pytest.approx(-p(t, 0.5 - s), rel=1e-14, abs=1e-15)

    @pytest.mark.parametrize("c", [0.0, -1.0, math.nan, math.inf])
    def test_needs_positive_c(self, c):
        with pytest.raises(ValueError):
            oracles.ShockPeakon(c)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            oracles.ShockPeakon(1.0)(-0.1, 0.5)

    def test_interior_momentum_vanishes(self):
        p = oracles.ShockPeakon(1.0)
        x = np.linspace(0.01, 0.99, 99)
        for t in (0.0, 0.5):
            assert sup(oracles.peakon_interior_momentum(p, t, x)) <= 1e-6

    def test_interior_stencil_refuses_the_jump(self):
        with pytest.raises(ValueError):
            oracles.peakon_interior_momentum(oracles.ShockPeakon(1.0), 0.0, [0.001])


class TestGreensFunction:
    def test_symmetry_and_mass(self):
        g = oracles.greens_function(64)
        assert sup(g[1:] - g[1:][::-1]) < 1e-15
        # closed form of the mean: int cosh(x - 1/2) dx = 2 sinh(1/2)
        s, w = oracles.gauss_panels(0.0, 1.0, 8)
        assert float(w @ oracles.greens_kernel(s)) == pytest.approx(1.0, abs=1e-15)

    def test_is_the_inverse_of_a(self):
        # G'' = G away from 0 and G' jumps by -1 there
        x = np.array([0.2, 0.7])
        h = 1e-4
        g2 = (oracles.greens_kernel(x + h) - 2 * oracles.greens_kernel(x) + oracles.greens_kernel(x - h)) / h**2
        assert sup(g2 - oracles.greens_kernel(x)) < 1e-6
        h = 1e-6
        jump = (oracles.greens_kernel(h) - oracles.greens_kernel(0.0)) / h - (
            oracles.greens_kernel(0.0) - oracles.greens_kernel(-h)
        ) / h
        assert jump == pytest.approx(-1.0, abs=1e-5)

    def test_convolution_matches_helmholtz_solve(self):
        x = spectral.grid(64)
        f = np.cos(2 * PI * x)
        assert sup(oracles.greens_convolve(f) - spectral.helmholtz_solve(f)) <= 1e-8

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=10, deadline=None)
    def test_a_undoes_the_convolution(self, seed):
        f = random_field(64, np.random.default_rng(seed), amp=1.0, modes=6)
        assert sup(spectral.helmholtz_apply(oracles.greens_convolve(f)) - f) <= 1e-8

    def test_convolution_of_a_kinked_function(self):
        # G * sinh^2(x - 1/2) in closed form, for x in [0, 1)
        x = np.linspace(0.0, 0.99, 12)
        y = x - 0.5
        exact = -np.cosh(2 * y) / 6 - 0.5 + 2 * math.cosh(0.5) / 3 * np.cosh(y)
        got = oracles.convolve_callable(lambda s: np.sinh(s - np.floor(s) - 0.5) ** 2, x)
        assert sup(got - exact) < 1e-14


class TestNonlocalForm:
    @given(st.integers(0, 2**32 - 1), st.floats(-5, 5))
    @settings(max_examples=10, deadline=None)
    def test_matches_classical_form(self, seed, b):
        u = random_field(64, np.random.default_rng(seed), amp=1.0, modes=3)
        assert oracles.nonlocal_form_residual(u, b) <= 1e-8


class TestBattery:
    def test_shipped_battery(self):
        battery = oracles.load_battery()
        assert len(battery) == 10
        assert len({f.name for f in battery}) == 10

    def test_json_round_trip(self, tmp_path):
        battery = oracles.load_battery()
        path = tmp_path / "b.json"
        path.write_text(oracles.battery_to_json(battery))
        again = oracles.load_battery(path)
        assert [f.as_dict() for f in again] == [f.as_dict() for f in battery]

    @pytest.mark.parametrize(
        "doc",
        [
            [],
            {"schema": "other/1", "functions": [{"name": "a", "modes": [[1, 1, 0]]}]},
            {"schema": oracles.BATTERY_SCHEMA, "functions": []},
            {"schema": oracles.BATTERY_SCHEMA, "functions": [{"name": "a"}]},
            {"schema": oracles.BATTERY_SCHEMA, "functions": [{"name": "a", "modes": [[1, 1, 0]], "extra": 1}]},
            {"schema": oracles.BATTERY_SCHEMA, "functions": [{"name": "a", "modes": []}]},
            {"schema": oracles.BATTERY_SCHEMA, "functions": [{"name": "a", "modes": [[1, 1, 0]], "bump_power": 1}]},
        ],
    )
    def test_schema_errors(self, doc):
        with pytest.raises(ValueError):
            oracles.battery_from_json(json.dumps(doc))

    def test_vanishes_at_window_ends(self):
        psi = oracles.TestFunction("f", ((1, 1.0, 0.5),), 2, (1.0, 0.3))
        x = np.linspace(0, 1, 7)
        for t in (0.1, 0.9):
            psi_t, psi_x, g = psi.evaluate(t, x, (0.1, 0.9))
            assert sup(psi_t) == 0.0 and sup(psi_x) == 0.0 and sup(g) == 0.0

    def test_time_derivative(self):
        psi = oracles.TestFunction("f", ((2, 0.3, -0.4),), 3, (1.0, -0.5))
        x = np.array([0.13, 0.61])
        h = 1e-5

        def value(t):
            g, _ = psi._time_factor(t, (0.0, 1.0))
            return g * psi._space(x)[0]

        fd = (value(0.4 + h) - value(0.4 - h)) / (2 * h)
        assert sup(psi.evaluate(0.4, x, (0.0, 1.0))[0] - fd) < 1e-8


def bump_integral(psi):
    # int_0^1 (4 tau (1 - tau))^p poly(tau) d tau by exact polynomial integration
    base = np.polynomial.Polynomial([0.0, 4.0, -4.0]) ** psi.bump_power * np.polynomial.Polynomial(psi.poly)
    anti = base.integ()
    return anti(1.0) - anti(0.0)


class TestWeakResidual:
    @pytest.mark.parametrize("form", ["direct", "transposed"])
    def test_zero_solution(self, form):
        assert oracles.dp_weak_residual(lambda t, x: 0.0 * t * x, form=form) == 0.0

    @pytest.mark.parametrize("form", ["direct", "transposed"])
    def test_constant_solution(self, form):
        assert oracles.dp_weak_residual(lambda t, x: 0.3 + 0.0 * t * x, form=form) < 1e-13

    @pytest.mark.parametrize("form", ["direct", "transposed"])
    def test_stationary_sine_closed_form(self, form):
        # for u = sin(2 pi x) the residual reduces to -(int g) * b_2 * pi (1 + 3/(1+16 pi^2)) / 2,
        # b_2 the sin(4 pi x) coefficient of the test function
        battery = oracles.load_battery()
        window = (0.1, 0.9)
        got = oracles.weak_residual(lambda t, x: np.sin(2 * PI * x) + 0.0 * t, battery, window, form=form)
        factor = PI * (1 + 3 / (1 + 16 * PI**2)) / 2
        expected = []
        for psi in battery:
            b2 = sum(b for k, _, b in psi.modes if k == 2)
            expected.append(-(window[1] - window[0]) * bump_integral(psi) * b2 * factor)
        assert sup(got - np.array(expected)) < 1e-12
        assert np.max(np.abs(got)) >= 1e-2

    @pytest.mark.parametrize("form", ["direct", "transposed"])
    def test_shock_peakon_is_weak_solution(self, form):
        assert oracles.dp_weak_residual(oracles.ShockPeakon(1.0), form=form) <= 1e-6

    def test_forms_agree_on_smooth_data(self):
        battery = oracles.load_battery()[:3]

        def u(t, x):
            return 0.2 * np.sin(2 * PI * x) * np.cos(t) + 0.1 * np.cos(4 * PI * x)

        a = oracles.weak_residual(u, battery, (0.1, 0.9), form="direct")
        b = oracles.weak_residual(u, battery, (0.1, 0.9), form="transposed")
        assert sup(a - b) < 1e-12

    def test_jump_off_the_panel_breaks_is_detected(self):
        def shifted(t, x):
            return oracles.shock_peakon_eval(oracles.ShockPeakon(1.0), t, x - 0.3137)

        with pytest.raises(QuadratureError):
            oracles.dp_weak_residual(shifted, panels=(8, 8), form="transposed")

    def test_bad_arguments(self):
        battery = oracles.load_battery()[:1]
        with pytest.raises(ValueError):
            oracles.weak_residual(lambda t, x: 0 * x, battery, (0.5, 0.5))
        with pytest.raises(ValueError):
            oracles.weak_residual(lambda t, x: 0 * x, battery, (0.1, 0.9), form="nope")


class TestManufacturedForcing:
    def test_constant(self):
        src = oracles.manufactured_forcing(lambda t, x: 0.4 + 0 * x, 3.0, 32)
        assert sup(src(0.3)) < 1e-12

    @pytest.mark.parametrize("b", [0.0, 2.0, 3.0])
    def test_cosine_with_flat_start(self, b):
        # g(t) = cos t: u_t(0) = 0, so f(0) = -euler_rhs(cos 2 pi x)
        src = oracles.manufactured_forcing(lambda t, x: np.cos(2 * PI * x) * np.cos(t), b, 64)
        x = spectral.grid(64)
        coeff = (1 + b) * PI * (1 + 4 * PI**2) / (1 + 16 * PI**2)
        assert sup(src(0.0) + coeff * np.sin(4 * PI * x)) < 1e-9

    def test_cosine_against_quadrature(self):
        # independent: sine coefficient of the classical flux by a fine midpoint rule
        b = 3.0
        s = (np.arange(4096) + 0.5) / 4096
        u, ux = np.cos(2 * PI * s), -2 * PI * np.sin(2 * PI * s)
        flux = (1 + 4 * PI**2) * (u * ux + b * u * ux)
        coeff = 2 * np.mean(flux * np.sin(4 * PI * s)) / (1 + 16 * PI**2)
        src = oracles.manufactured_forcing(lambda t, x: np.cos(2 * PI * x) * np.cos(t), b, 64)
        x = spectral.grid(64)
        assert sup(src(0.0) - coeff * np.sin(4 * PI * x)) < 1e-9

    def test_finite_difference_time_derivative(self):
        exact = lambda t, x: 0.1 * np.cos(2 * PI * x) * np.cos(t)  # noqa: E731
        exact_t = lambda t, x: -0.1 * np.cos(2 * PI * x) * np.sin(t)  # noqa: E731
        a = oracles.manufactured_forcing(exact, 3.0, 64)
        b = oracles.manufactured_forcing(exact, 3.0, 64, u_t=exact_t)
        assert sup(a(0.7) - b(0.7)) < 1e-12
