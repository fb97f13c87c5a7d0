"""Physical parameters, state descriptions and right-hand sides.

Three equivalent descriptions of a state are used:

* primitive ``(h, u)``: depth and velocity, evolved by the viscous
  shallow-water system with friction and capillarity;
* transformed ``(h, v)`` with the effective velocity ``v = u + mu grad ln h``;
* momentum ``(q, m)`` with ``q = h - 1`` and ``m = h v``.

Under ``kappa = mu**2`` and ``1/Fr**2 = r mu`` the momentum description obeys

    dq/dt = -div m + mu lap q
    dm/dt = -div(m (x) m / h) + mu lap m - r m

The viscous stress of the primitive system is ``2 mu h D`` with ``D`` the
strain tensor (``viscosity_form="strain"``) or the full velocity gradient
(``"gradient"``). With this normalization the reduction above is exact for
the strain form in every dimension, and for the gradient form in 1-D and on
curl-free flows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError
from .grid import check_floor, integrate

VISCOSITY_FORMS = ("strain", "gradient")
DEFAULT_FLOOR = 1e-3


@dataclass(frozen=True)
class Params:
    """Physical coefficients.

    In constrained mode ``kappa`` and ``fr`` are derived from ``mu`` and
    ``r``; supplying values that contradict ``kappa = mu**2`` or
    ``1/fr**2 = r mu`` raises :class:`ConfigError`. ``fr = inf`` encodes a
    vanishing pressure term (``r = 0``).
    """

    mu: float = 0.1
    r: float = 1.0
    kappa: float | None = None
    fr: float | None = None
    viscosity_form: str = "strain"
    constrained: bool = True
    floor: float = DEFAULT_FLOOR

    def __post_init__(self):
        errs = []
        if not self.mu > 0:
            errs.append(f"mu must be > 0, got {self.mu}")
        if not self.r >= 0:
            errs.append(f"r must be >= 0, got {self.r}")
        if self.viscosity_form not in VISCOSITY_FORMS:
            errs.append(f"viscosity_form must be one of {VISCOSITY_FORMS}")
        if not self.floor > 0:
            errs.append(f"floor must be > 0, got {self.floor}")
        if errs:
            raise ConfigError(errs)
        mu, r = float(self.mu), float(self.r)
        kappa_c = mu * mu
        fr_c = math.inf if r == 0 else 1.0 / math.sqrt(r * mu)
        if self.constrained:
            if self.kappa is not None and not math.isclose(self.kappa, kappa_c, rel_tol=1e-12):
                errs.append(
                    f"constrained coefficients require kappa = mu^2 = {kappa_c:g}, got {self.kappa}"
                )
            if self.fr is not None and not _same_fr(self.fr, fr_c):
                errs.append(
                    f"constrained coefficients require 1/fr^2 = r*mu = {r * mu:g}, "
                    f"got fr = {self.fr}"
                )
            if errs:
                raise ConfigError(errs)
            object.__setattr__(self, "kappa", kappa_c)
            object.__setattr__(self, "fr", fr_c)
        else:
            kappa = 0.0 if self.kappa is None else float(self.kappa)
            fr = 1.0 if self.fr is None else float(self.fr)
            if kappa < 0:
                errs.append(f"kappa must be >= 0, got {kappa}")
            if not fr > 0:
                errs.append(f"fr must be > 0, got {fr}")
            if errs:
                raise ConfigError(errs)
            object.__setattr__(self, "kappa", kappa)
            object.__setattr__(self, "fr", fr)

    @property
    def pressure_coeff(self):
        """``1/Fr**2`` (exactly ``r mu`` in constrained mode)."""
        if self.constrained:
            return self.r * self.mu
        return 0.0 if math.isinf(self.fr) else 1.0 / self.fr**2

    def require_constrained(self):
        if not self.constrained:
            raise ConfigError("the momentum system needs constrained coefficients (kappa = mu^2, 1/fr^2 = r mu)")

    def with_form(self, form):
        return replace(self, viscosity_form=form)

    def to_dict(self):
        return {
            "mu": self.mu,
            "r": self.r,
            "kappa": self.kappa,
            "fr": "inf" if math.isinf(self.fr) else self.fr,
            "viscosity_form": self.viscosity_form,
            "constrained": self.constrained,
            "floor": self.floor,
        }


def _same_fr(fr, fr_c):
    if math.isinf(fr_c) or math.isinf(fr):
        return math.isinf(fr_c) and math.isinf(fr)
    return math.isclose(fr, fr_c, rel_tol=1e-12)


# -- states -----------------------------------------------------------------

@dataclass
class PrimitiveState:
    grid: object
    h: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        self.h = self.grid.check_scalar(np.asarray(self.h, dtype=float))
        self.u = self.grid.check_vector(np.asarray(self.u, dtype=float))


@dataclass
class TransformedState:
    grid: object
    h: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.h = self.grid.check_scalar(np.asarray(self.h, dtype=float))
        self.v = self.grid.check_vector(np.asarray(self.v, dtype=float))


@dataclass
class MomentumState:
    grid: object
    q: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        self.q = self.grid.check_scalar(np.asarray(self.q, dtype=float))
        self.m = self.grid.check_vector(np.asarray(self.m, dtype=float))

    @property
    def h(self):
        return 1.0 + self.q


def _grad_log(grid, h, floor):
    check_floor(grid, h, floor)
    return grid.inverse(grid.grad_hat(grid.forward(np.log(h))))


def to_effective(s, p):
    """``v = u + mu grad ln h``."""
    g = s.grid
    return TransformedState(g, s.h.copy(), s.u + p.mu * _grad_log(g, s.h, p.floor))


def from_effective(s, p):
    """``u = v - mu grad ln h``."""
    g = s.grid
    return PrimitiveState(g, s.h.copy(), s.v - p.mu * _grad_log(g, s.h, p.floor))


def transformed_to_momentum(s):
    return MomentumState(s.grid, s.h - 1.0, s.h * s.v)


def momentum_to_transformed(s, p):
    h = s.h
    check_floor(s.grid, h, p.floor)
    return TransformedState(s.grid, h, s.m / h)


def primitive_to_momentum(s, p):
    return transformed_to_momentum(to_effective(s, p))


def momentum_to_primitive(s, p):
    return from_effective(momentum_to_transformed(s, p), p)


def classical_momentum(s, p):
    """Physical momentum ``h u = m - mu grad h`` of a momentum-form state."""
    g = s.grid
    return s.m - p.mu * g.inverse(g.grad_hat(g.forward(s.q)))


# -- dealiased algebra on spectral arrays -----------------------------------

class _Dealiased:
    """Small helper keeping physical copies of 2/3-truncated fields."""

    def __init__(self, grid):
        self.g = grid

    def trunc(self, f):
        """Physical field truncated to the 2/3 band."""
        g = self.g
        return g.inverse(g.dealias_hat(g.forward(f)))

    def prod_hat(self, a, b):
        """Spectrum of the truncated product of two already truncated fields."""
        g = self.g
        return g.dealias_hat(g.forward(a * b))

    def prod(self, a, b):
        return self.g.inverse(self.prod_hat(a, b))


# -- capillarity ------------------------------------------------------------

def kappa_of_h(h, p, alpha=-1.0):
    return p.kappa * h**alpha


def dkappa_of_h(h, p, alpha=-1.0):
    return p.kappa * alpha * h ** (alpha - 1.0)


def capillary_divK(grid, h, p, form="simplified", alpha=-1.0):
    """Capillary force ``div K`` for ``kappa(h) = kappa h**alpha``.

    ``form="general"`` evaluates

        grad(h k(h) lap h + (k(h) + h k'(h)) |grad h|^2 / 2) - div(k(h) grad h (x) grad h)

    term by term; ``form="simplified"`` uses the ``alpha = -1`` reduction
    ``grad(kappa lap h) - div((kappa/h) grad h (x) grad h)``.
    """
    grid.check_scalar(h)
    check_floor(grid, h, p.floor)
    if form == "simplified" and alpha != -1.0:
        raise ValueError("the simplified capillary form only holds for alpha = -1")
    D = _Dealiased(grid)
    Hh = grid.dealias_hat(grid.forward(h))
    gradh = grid.inverse(grid.grad_hat(Hh))
    laph_hat = grid.lap_hat(Hh)
    if form == "simplified":
        coef = D.trunc(p.kappa / h)
        scalar_hat = p.kappa * laph_hat
    elif form == "general":
        hd = grid.inverse(Hh)
        coef = D.trunc(kappa_of_h(h, p, alpha))
        c2 = D.trunc(0.5 * (kappa_of_h(h, p, alpha) + h * dkappa_of_h(h, p, alpha)))
        laph = grid.inverse(laph_hat)
        hk = D.prod(hd, coef)
        g2 = sum(D.prod(gradh[j], gradh[j]) for j in range(grid.dim))
        scalar_hat = D.prod_hat(hk, laph) + D.prod_hat(c2, g2)
    else:
        raise ValueError(f"unknown capillary form {form!r}")
    out_hat = grid.grad_hat(scalar_hat)
    cg = [D.prod(coef, gradh[i]) for i in range(grid.dim)]
    for i in range(grid.dim):
        for j in range(grid.dim):
            out_hat[i] -= 1j * grid.kd[j] * D.prod_hat(cg[i], gradh[j])
    return grid.inverse(out_hat)


# -- right-hand sides --------------------------------------------------------

def velocity_gradient(grid, u):
    """``J[i][j] = d_j u_i`` as an array of shape ``(dim, dim, *shape)``."""
    U = grid.forward(u)
    return grid.inverse(np.stack([grid.grad_hat(U[i]) for i in range(grid.dim)]))


def deformation(grid, u, form):
    J = velocity_gradient(grid, u)
    if form == "strain":
        return 0.5 * (J + np.swapaxes(J, 0, 1))
    return J


def rhs_primitive_conserved(grid, h, w, p, capillary_form="simplified"):
    """Time derivatives ``(dh/dt, d(hu)/dt)`` given depth and momentum ``w = h u``."""
    check_floor(grid, h, p.floor)
    D = _Dealiased(grid)
    hd = D.trunc(h)
    wd = np.stack([D.trunc(w[i]) for i in range(grid.dim)])
    Wh = grid.forward(wd)
    dh = grid.inverse(-grid.div_hat(Wh))
    u = w / h
    ud = np.stack([D.trunc(u[i]) for i in range(grid.dim)])
    Dt = deformation(grid, ud, p.viscosity_form)
    out = np.zeros((grid.dim, *grid.shape), dtype=complex)
    for i in range(grid.dim):
        acc = np.zeros(grid.shape, dtype=complex)
        for j in range(grid.dim):
            flux = D.prod_hat(wd[i], ud[j]) - 2.0 * p.mu * D.prod_hat(hd, Dt[i, j])
            acc -= 1j * grid.kd[j] * flux
        out[i] = acc
    Hh = grid.forward(h)
    out -= p.pressure_coeff * grid.grad_hat(Hh)
    out -= p.r * Wh
    dw = grid.inverse(out)
    if p.kappa:
        dw = dw + capillary_divK(grid, h, p, form=capillary_form)
    return dh, dw


def rhs_primitive(s, p, capillary_form="simplified"):
    """Time derivatives of ``(h, h u)`` for the viscous shallow-water system."""
    return rhs_primitive_conserved(s.grid, s.h, s.h * s.u, p, capillary_form)


def G_nonlinear_hat(grid, q, m, floor=DEFAULT_FLOOR):
    """Spectrum of ``-div(m (x) m / (1 + q))`` with 2/3 dealiasing."""
    h = 1.0 + q
    check_floor(grid, h, floor)
    D = _Dealiased(grid)
    md = np.stack([D.trunc(m[i]) for i in range(grid.dim)])
    ih = D.trunc(1.0 / h)
    a = [D.prod(md[i], ih) for i in range(grid.dim)]
    out = np.zeros((grid.dim, *grid.shape), dtype=complex)
    for i in range(grid.dim):
        for j in range(grid.dim):
            out[i] -= 1j * grid.kd[j] * D.prod_hat(a[i], md[j])
    return out


def G_nonlinear(grid, q, m, floor=DEFAULT_FLOOR):
    """Nonlinear momentum source ``-div(m (x) m / h)`` with ``h = 1 + q``."""
    grid.check_scalar(q)
    grid.check_vector(m)
    return grid.inverse(G_nonlinear_hat(grid, q, m, floor))


def rhs_momentum(s, p):
    """Time derivatives ``(dq/dt, dm/dt)`` of the momentum system."""
    p.require_constrained()
    g = s.grid
    Qh, Mh = g.forward(s.q), g.forward(s.m)
    dq = g.inverse(-g.div_hat(Mh) + p.mu * g.lap_hat(Qh))
    dm_hat = G_nonlinear_hat(g, s.q, s.m, p.floor) + p.mu * g.lap_hat(Mh) - p.r * Mh
    return dq, g.inverse(dm_hat)


# -- pressure potential and energy --------------------------------------------

def pi_potential(s, p, pressure=None):
    """Pressure potential ``Pi(s) = s (int_1^s P(z)/z^2 dz - P(1))``.

    With the default linear law ``P(z) = z / Fr^2`` this is
    ``s (ln s - 1) / Fr^2``; pass ``pressure`` (a callable) to integrate a
    different law numerically.
    """
    s = float(s)
    if not s > 0:
        raise ValueError(f"Pi is defined for s > 0, got {s}")
    if pressure is None:
        return p.pressure_coeff * s * (math.log(s) - 1.0)
    integral, _ = quad(lambda z: pressure(z) / z**2, 1.0, s, epsabs=1e-14, epsrel=1e-13)
    return s * (integral - pressure(1.0))


def pi_excess(h, p):
    """``Pi(h) - Pi(1)`` for the linear pressure law, elementwise."""
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise ValueError("Pi is defined for h > 0 only")
    return p.pressure_coeff * (h * np.log(h) - h + 1.0)


def energy_density(s, p):
    g = s.grid
    if np.any(s.h <= 0):
        raise ValueError("energy needs h > 0")
    gradh = g.inverse(g.grad_hat(g.forward(s.h)))
    kin = 0.5 * s.h * np.sum(s.u**2, axis=0)
    cap = 0.5 * (p.kappa / s.h) * np.sum(gradh**2, axis=0)
    return kin + pi_excess(s.h, p) + cap


def energy(s, p):
    """Kinetic + potential + capillary energy by grid quadrature."""
    return integrate(s.grid, energy_density(s, p))


def dissipation_rate(s, p):
    """``int 2 mu h |D|^2 + r h |u|^2``: the rate at which energy is dissipated."""
    g = s.grid
    Dt = deformation(g, s.u, p.viscosity_form)
    visc = 2.0 * p.mu * s.h * np.sum(Dt**2, axis=(0, 1))
    fric = p.r * s.h * np.sum(s.u**2, axis=0)
    return integrate(g, visc + fric)
