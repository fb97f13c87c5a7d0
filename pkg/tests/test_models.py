import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from shallowlab.errors import ConfigError, VacuumBreach
from shallowlab.grid import Grid, integrate, spectral_gradient
from shallowlab.initial import random_band_field
from shallowlab.models import (
    MomentumState,
    Params,
    PrimitiveState,
    capillary_divK,
    classical_momentum,
    energy,
    from_effective,
    G_nonlinear,
    momentum_to_primitive,
    pi_excess,
    pi_potential,
    primitive_to_momentum,
    rhs_momentum,
    rhs_primitive,
    to_effective,
)


def band(grid, seed, kmax=4, amp=0.3):
    return random_band_field(grid, np.random.default_rng(seed), 1, kmax, amp)


def random_primitive(grid, seed, amp=0.3):
    h = 1.0 + band(grid, seed, amp=amp)
    u = np.stack([band(grid, seed + 100 + j, amp=amp) for j in range(grid.dim)])
    return PrimitiveState(grid, h, u)


class TestParams:
    def test_constrained_values(self):
        p = Params(mu=0.2, r=0.5)
        assert p.kappa == pytest.approx(0.04)
        assert 1 / p.fr**2 == pytest.approx(0.1)
        assert p.pressure_coeff == 0.1

    def test_zero_friction_means_no_pressure(self):
        p = Params(mu=0.1, r=0.0)
        assert math.isinf(p.fr)
        assert p.pressure_coeff == 0.0
        assert p.to_dict()["fr"] == "inf"

    def test_contradicting_kappa_names_constraint(self):
        with pytest.raises(ConfigError, match="kappa = mu"):
            Params(mu=0.1, r=1.0, kappa=0.02)

    def test_contradicting_froude(self):
        with pytest.raises(ConfigError, match="1/fr"):
            Params(mu=0.1, r=1.0, fr=1.0)

    def test_consistent_values_accepted(self):
        p = Params(mu=0.1, r=1.0, kappa=0.01, fr=1 / math.sqrt(0.1))
        assert p.kappa == pytest.approx(0.01)

    def test_unconstrained_mode(self):
        p = Params(mu=0.1, r=1.0, kappa=0.0, fr=2.0, constrained=False)
        assert p.pressure_coeff == pytest.approx(0.25)
        with pytest.raises(ConfigError):
            p.require_constrained()

    @pytest.mark.parametrize("kw", [{"mu": 0}, {"r": -1}, {"viscosity_form": "tensor"}, {"floor": 0}])
    def test_rejects_invalid(self, kw):
        with pytest.raises(ConfigError):
            Params(**kw)


class TestTransforms:
    def test_flat_depth_leaves_velocity(self):
        g = Grid(2, 16)
        u = np.random.default_rng(0).standard_normal((2, *g.shape))
        v = to_effective(PrimitiveState(g, np.ones(g.shape), u), Params()).v
        assert np.array_equal(v, u)

    def test_effective_velocity_closed_form(self):
        g = Grid(1, 256)
        (x,) = g.coords()
        mu = 0.1
        h = 1 + 0.3 * np.cos(x)
        v = to_effective(PrimitiveState(g, h, np.zeros((1, 256))), Params(mu=mu)).v[0]
        assert np.abs(v - (-0.3 * mu * np.sin(x) / h)).max() < 1e-12

    @given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2]))
    def test_roundtrip(self, seed, dim):
        g = Grid(dim, 32)
        p = Params()
        s = random_primitive(g, seed)
        back = from_effective(to_effective(s, p), p)
        assert np.abs(back.u - s.u).max() < 1e-12
        m = primitive_to_momentum(s, p)
        s2 = momentum_to_primitive(m, p)
        assert np.abs(s2.h - s.h).max() < 1e-14
        assert np.abs(s2.u - s.u).max() < 1e-12

    def test_classical_momentum(self):
        g = Grid(1, 64)
        (x,) = g.coords()
        p = Params(mu=0.1)
        zero = MomentumState(g, np.zeros(64), np.zeros((1, 64)))
        assert np.abs(classical_momentum(zero, p)).max() == 0
        mc = classical_momentum(MomentumState(g, 0.3 * np.cos(x), np.zeros((1, 64))), p)
        assert np.abs(mc[0] - 0.3 * 0.1 * np.sin(x)).max() < 1e-14

    def test_classical_momentum_is_hu(self):
        g = Grid(2, 64)
        p = Params(mu=0.1)
        s = random_primitive(g, 7)
        mc = classical_momentum(primitive_to_momentum(s, p), p)
        assert np.abs(mc - s.h * s.u).max() < 1e-10

    def test_vacuum_raises(self):
        g = Grid(1, 16)
        with pytest.raises(VacuumBreach):
            to_effective(PrimitiveState(g, np.full(16, -0.1), np.zeros((1, 16))), Params())
        with pytest.raises(VacuumBreach):
            momentum_to_primitive(MomentumState(g, np.full(16, -1.0), np.zeros((1, 16))), Params())


def _sympy_capillary(a, kappa):
    x = sp.symbols("x")
    h = 1 + a * sp.cos(x)
    expr = kappa * sp.diff(h, x, 3) - sp.diff(kappa * sp.diff(h, x) ** 2 / h, x)
    return sp.lambdify(x, expr, "numpy")


class TestCapillary:
    def test_flat_depth_has_no_force(self):
        g = Grid(2, 16)
        assert np.abs(capillary_divK(g, np.full(g.shape, 1.3), Params())).max() == 0.0

    @pytest.mark.parametrize("a", [0.2, 0.5])
    def test_sympy_oracle_1d(self, a):
        g = Grid(1, 256)
        (x,) = g.coords()
        p = Params(mu=0.1)
        got = capillary_divK(g, 1 + a * np.cos(x), p)[0]
        assert np.abs(got - _sympy_capillary(a, p.kappa)(x)).max() < 1e-8

    @pytest.mark.parametrize("dim,n", [(1, 128), (2, 64)])
    def test_general_matches_simplified(self, dim, n):
        g = Grid(dim, n)
        h = 1.0 + band(g, 3, amp=0.4)
        p = Params(mu=0.2)
        a = capillary_divK(g, h, p, "simplified")
        b = capillary_divK(g, h, p, "general")
        assert np.abs(a - b).max() < 1e-10

    def test_simplified_form_needs_minus_one(self):
        g = Grid(1, 16)
        with pytest.raises(ValueError):
            capillary_divK(g, np.ones(16), Params(), "simplified", alpha=0.0)


def _sympy_primitive_rhs(mu, r):
    x = sp.symbols("x")
    h = 1 + sp.Rational(3, 10) * sp.sin(x)
    u = sp.Rational(1, 5) * sp.cos(2 * x)
    kappa, pc = mu**2, r * mu
    w = h * u
    dh = -sp.diff(w, x)
    dw = (
        -sp.diff(h * u**2, x)
        + sp.diff(2 * mu * h * sp.diff(u, x), x)
        - pc * sp.diff(h, x)
        - r * w
        + kappa * sp.diff(h, x, 3)
        - sp.diff(kappa * sp.diff(h, x) ** 2 / h, x)
    )
    return sp.lambdify(x, dh, "numpy"), sp.lambdify(x, dw, "numpy")


class TestPrimitiveRHS:
    def test_rest_state(self):
        g = Grid(2, 16)
        dh, dw = rhs_primitive(PrimitiveState(g, np.ones(g.shape), np.zeros((2, *g.shape))), Params())
        assert np.abs(dh).max() == 0 and np.abs(dw).max() == 0

    def test_manufactured_sympy_oracle(self):
        mu, r = 0.1, 1.0
        g = Grid(1, 256)
        (x,) = g.coords()
        h = 1 + 0.3 * np.sin(x)
        u = 0.2 * np.cos(2 * x)
        dh, dw = rhs_primitive(PrimitiveState(g, h, u[None]), Params(mu=mu, r=r))
        fdh, fdw = _sympy_primitive_rhs(mu, r)
        assert np.abs(dh - fdh(x)).max() < 1e-8
        assert np.abs(dw[0] - fdw(x)).max() < 1e-8

    @pytest.mark.parametrize("form", ["strain", "gradient"])
    @pytest.mark.parametrize("dim,n", [(1, 256), (2, 32)])
    def test_exact_solution_residual(self, form, dim, n):
        # h solving the heat equation with u = -mu grad ln h is an exact solution
        g = Grid(dim, n)
        p = Params(mu=0.1, r=1.0, viscosity_form=form)
        X = g.coords()
        h = 1 + 0.3 * np.cos(X[0]) + (0.2 * np.cos(X[1]) if dim == 2 else 0)
        u = -p.mu * spectral_gradient(g, np.log(h))
        dh, dw = rhs_primitive(PrimitiveState(g, h, u), p)
        lap_h = g.inverse(g.lap_hat(g.forward(h)))
        assert np.abs(dh - p.mu * lap_h).max() < 1e-8
        assert np.abs(dw + p.mu * spectral_gradient(g, p.mu * lap_h)).max() < 1e-8

    @given(st.integers(0, 2**32 - 1))
    def test_mass_is_conserved(self, seed):
        g = Grid(2, 16)
        dh, _ = rhs_primitive(random_primitive(g, seed), Params())
        assert abs(integrate(g, dh)) < 1e-12


class TestMomentumRHS:
    def test_zero_momentum_is_heat_flow(self):
        g = Grid(1, 64)
        (x,) = g.coords()
        p = Params(mu=0.1)
        dq, dm = rhs_momentum(MomentumState(g, 0.3 * np.cos(2 * x), np.zeros((1, 64))), p)
        assert np.abs(dm).max() == 0
        assert np.abs(dq + 0.1 * 4 * 0.3 * np.cos(2 * x)).max() < 1e-13

    def test_rest(self):
        g = Grid(2, 16)
        dq, dm = rhs_momentum(MomentumState(g, np.zeros(g.shape), np.zeros((2, *g.shape))), Params())
        assert np.abs(dq).max() == 0 and np.abs(dm).max() == 0

    def test_nonlinear_closed_form(self):
        g = Grid(1, 64)
        (x,) = g.coords()
        G = G_nonlinear(g, np.zeros(64), np.sin(x)[None])
        assert np.abs(G[0] + np.sin(2 * x)).max() < 1e-14

    def test_nonlinear_refined_grid_oracle(self):
        g, g2 = Grid(2, 32), Grid(2, 128)
        X, Y = g.coords()
        X2, Y2 = g2.coords()
        m = np.stack([np.cos(X + 2 * Y), 0.5 * np.sin(3 * X)])
        m2 = np.stack([np.cos(X2 + 2 * Y2), 0.5 * np.sin(3 * X2)])
        ref = G_nonlinear(g2, np.zeros(g2.shape), m2)
        got = G_nonlinear(g, np.zeros(g.shape), m)
        assert np.abs(got - ref[:, ::4, ::4]).max() < 1e-10

    @given(st.integers(0, 2**32 - 1))
    def test_quadratic_in_momentum(self, seed):
        g = Grid(2, 16)
        q = band(g, seed, amp=0.4)
        m = np.stack([band(g, seed + j + 1) for j in range(2)])
        G1 = G_nonlinear(g, q, m)
        assert np.array_equal(G_nonlinear(g, q, 2 * m), 4 * G1)
        assert np.abs(G_nonlinear(g, q, 0.3 * m) - 0.09 * G1).max() < 1e-13 * (1 + np.abs(G1).max())

    def test_requires_constraint(self):
        g = Grid(1, 16)
        p = Params(constrained=False, kappa=0.0, fr=1.0)
        with pytest.raises(ConfigError):
            rhs_momentum(MomentumState(g, np.zeros(16), np.zeros((1, 16))), p)


class TestEquivalence:
    """The instantaneous rates of the two descriptions agree."""

    @staticmethod
    def _gap(s, p):
        g = s.grid
        dh, dw = rhs_primitive(s, p)
        dq_ref = dh
        dm_ref = dw + p.mu * spectral_gradient(g, dh)
        dq, dm = rhs_momentum(primitive_to_momentum(s, p), p)
        return max(np.abs(dq - dq_ref).max(), np.abs(dm - dm_ref).max())

    @pytest.mark.parametrize("dim,n", [(1, 128), (2, 128)])
    def test_strain_form_exact(self, dim, n):
        s = random_primitive(Grid(dim, n), 11)
        assert self._gap(s, Params(mu=0.1, r=1.0)) < 1e-10

    def test_gradient_form_exact_in_1d(self):
        s = random_primitive(Grid(1, 128), 12)
        assert self._gap(s, Params(viscosity_form="gradient")) < 1e-10

    def test_gradient_form_exact_on_curl_free_flow(self):
        g = Grid(2, 128)
        h = 1.0 + band(g, 13)
        u = spectral_gradient(g, band(g, 14))
        assert self._gap(PrimitiveState(g, h, u), Params(viscosity_form="gradient")) < 1e-10

    def test_gradient_form_differs_on_rotational_flow(self):
        g = Grid(2, 64)
        X, Y = g.coords()
        h = 1 + 0.3 * np.cos(X)
        u = np.stack([0.3 * np.sin(Y), np.zeros(g.shape)])
        assert self._gap(PrimitiveState(g, h, u), Params(viscosity_form="gradient")) > 1e-4


class TestPotentialAndEnergy:
    def test_pi_values(self):
        p = Params(mu=0.1, r=1.0)
        assert pi_potential(1.0, p) - pi_potential(1.0, p) == 0
        assert pi_potential(math.e, p) - pi_potential(1.0, p) == pytest.approx(1 / p.fr**2)
        eps = 1e-6
        slope = (pi_potential(1 + eps, p) - pi_potential(1 - eps, p)) / (2 * eps)
        assert abs(slope) < 1e-9

    @pytest.mark.parametrize("s", [0.3, 1.0, 2.5])
    def test_quadrature_matches_closed_form(self, s):
        p = Params(mu=0.1, r=1.0)
        law = lambda z: z * p.pressure_coeff
        assert pi_potential(s, p, pressure=law) == pytest.approx(pi_potential(s, p), abs=1e-13)

    def test_pi_excess_nonnegative(self):
        p = Params()
        h = np.linspace(0.05, 5, 100)
        assert np.all(pi_excess(h, p) >= 0)
        assert pi_excess(np.array([1.0]), p)[0] == 0

    def test_pi_domain(self):
        with pytest.raises(ValueError):
            pi_potential(0.0, Params())
        with pytest.raises(ValueError):
            pi_excess(np.array([1.0, -1.0]), Params())

    def test_energy_of_rest_and_positive_otherwise(self):
        g = Grid(2, 16)
        p = Params()
        rest = PrimitiveState(g, np.ones(g.shape), np.zeros((2, *g.shape)))
        assert energy(rest, p) == 0
        assert energy(random_primitive(g, 1), p) > 0
