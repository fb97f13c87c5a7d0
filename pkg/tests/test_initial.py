import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shallowlab.errors import ConfigError, VacuumBreach
from shallowlab.grid import Grid
from shallowlab.initial import (
    cosine_mode,
    field_from_coefficients,
    generate_initial,
    random_band_field,
    random_coefficients,
)
from shallowlab.littlewood_paley import besov_value, phi
from shallowlab.models import Params, classical_momentum

P = Params(mu=0.1, r=1.0)


def test_zero_generator_is_rest():
    g = Grid(2, 16)
    d = generate_initial({"generator": "zero"}, g, P)
    assert np.all(d.momentum.q == 0) and np.all(d.momentum.m == 0)
    assert np.all(d.primitive.h == 1) and np.all(d.primitive.u == 0)
    assert d.min_h0 == 1.0


class TestLargeGradient:
    def test_density_norm_closed_form(self):
        g = Grid(1, 256)
        d = generate_initial({"generator": "large_gradient", "A": 0.9}, g, P)
        expected = 0.9 * math.sqrt(math.pi) * (2**-0.5 * phi(2.0) + phi(1.0))
        assert d.norms["q0_B"] == pytest.approx(expected, rel=1e-12)
        assert d.norms["m0_B"] == 0.0
        assert d.min_h0 == pytest.approx(0.1)

    def test_classical_momentum_sign(self):
        # m = 0 means h u = -mu grad h = +0.9 mu sin x
        g = Grid(1, 128)
        (x,) = g.coords()
        d = generate_initial({"generator": "large_gradient", "A": 0.9}, g, P)
        mc = classical_momentum(d.momentum, P)
        assert np.abs(mc[0] - 0.9 * P.mu * np.sin(x)).max() < 1e-13
        assert np.abs(d.primitive.h * d.primitive.u - mc).max() < 1e-12

    def test_momentum_rescaled(self):
        g = Grid(2, 32)
        spec = {
            "generator": "large_gradient",
            "A": 0.6,
            "k": [0, 1],
            "momentum": {"modes": [{"field": "m1", "wavevector": [1, 1], "amplitude": 1.0}], "norm": 0.05},
        }
        d = generate_initial(spec, g, P)
        assert d.norms["m0_B"] == pytest.approx(0.05, rel=1e-13)
        assert d.min_h0 == pytest.approx(0.4)
        _, Y = g.coords()
        assert np.abs(d.momentum.q - 0.6 * np.cos(Y)).max() < 1e-15

    def test_floor_breach(self):
        g = Grid(1, 32)
        with pytest.raises(VacuumBreach):
            generate_initial({"generator": "large_gradient", "A": 0.9999}, g, P)

    def test_zero_direction_cannot_be_rescaled(self):
        g = Grid(1, 32)
        with pytest.raises(ConfigError):
            generate_initial({"generator": "large_gradient", "momentum": {"modes": [], "norm": 0.1}}, g, P)


class TestModes:
    def test_cosine_mode_wavevector(self):
        g = Grid(2, 16, (2.0, 4.0))
        X, Y = g.coords()
        f = cosine_mode(g, (1, 2), 0.5, 0.3)
        assert np.abs(f - 0.5 * np.cos(math.pi * X + math.pi * Y + 0.3)).max() < 1e-14
        with pytest.raises(ValueError):
            cosine_mode(g, (1,))

    def test_fields_dispatch(self):
        g = Grid(2, 16)
        modes = [
            {"field": "q", "wavevector": [1, 0], "amplitude": 0.2},
            {"field": "m2", "wavevector": [0, 1], "amplitude": 0.1},
        ]
        d = generate_initial({"generator": "modes", "modes": modes}, g, P)
        X, Y = g.coords()
        assert np.abs(d.momentum.q - 0.2 * np.cos(X)).max() < 1e-15
        assert np.all(d.momentum.m[0] == 0)
        assert np.abs(d.momentum.m[1] - 0.1 * np.cos(Y)).max() < 1e-15


class TestRandomBand:
    def test_reproducible(self):
        g = Grid(2, 32)
        spec = {"generator": "random_band", "seed": 5, "k_min": 1, "k_max": 4, "amplitude": 0.2}
        a = generate_initial(spec, g, P)
        b = generate_initial(spec, g, P)
        assert np.array_equal(a.momentum.q, b.momentum.q)
        c = generate_initial({**spec, "seed": 6}, g, P)
        assert not np.array_equal(a.momentum.q, c.momentum.q)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_same_function_on_every_grid(self, dim):
        coarse, fine = Grid(dim, 16), Grid(dim, 32)
        a = random_band_field(coarse, np.random.default_rng(3), 1, 5, 0.4)
        b = random_band_field(fine, np.random.default_rng(3), 1, 5, 0.4)
        sub = b[(slice(None, None, 2),) * dim]
        assert np.abs(a - sub).max() < 1e-14

    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.9))
    def test_sup_bounded_by_amplitude(self, seed, amp):
        g = Grid(2, 16)
        f = random_band_field(g, np.random.default_rng(seed), 1, 5, amp)
        assert np.abs(f).max() <= amp * (1 + 1e-12)
        assert abs(f.mean()) < 1e-15

    def test_shell_and_symmetry(self):
        c = random_coefficients(2, np.random.default_rng(0), 2, 3)
        assert c[3, 3] == 0 and c[4, 3] == 0
        assert np.allclose(c, np.conj(c[::-1, ::-1]))

    def test_unresolved_band(self):
        c = random_coefficients(1, np.random.default_rng(0), 1, 8)
        with pytest.raises(ValueError):
            field_from_coefficients(Grid(1, 16), c)

    def test_empty_shell(self):
        with pytest.raises(ValueError):
            random_band_field(Grid(1, 32), np.random.default_rng(0), 3.5, 3.7, 0.1)

    def test_norms_reported(self):
        g = Grid(1, 64)
        d = generate_initial({"generator": "random_band", "seed": 1, "amplitude": 0.2, "m_amplitude": 0.05}, g, P)
        assert d.norms["q0_B"] == pytest.approx(besov_value(g, d.momentum.q, 0.5))
        assert set(d.summary()) == {"q0_B", "m0_B", "classical_m0_B", "grad_h0_B", "min_h0"}
        assert d.min_h0 >= 0.8
