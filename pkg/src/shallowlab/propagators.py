"""Heat and damped-heat semigroups, Duhamel integration and ETD time stepping.

Linear parts are diagonal in Fourier space (rates ``-mu |k|^2`` for the
depth perturbation and ``-(mu |k|^2 + r)`` for momentum) and are applied
exactly; everything else is treated explicitly with first- or second-order
exponential time differencing (Cox-Matthews ETD1 / ETDRK2).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import VacuumBreach
from .grid import check_floor, integrate
from .littlewood_paley import besov_value
from .models import (
    G_nonlinear_hat,
    MomentumState,
    PrimitiveState,
    energy,
    rhs_primitive_conserved,
)

log = logging.getLogger(__name__)

SCHEMES = ("ETD1", "ETDRK2")


# -- phi functions ----------------------------------------------------------

def phi1(z):
    """``(e^z - 1)/z`` with the removable singularity filled in."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-5
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z / 2.0 + z * z / 6.0, np.expm1(zs) / zs)


def phi2(z):
    """``(e^z - 1 - z)/z^2``; Taylor series near zero."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-2
    zs = np.where(small, 1.0, z)
    series = 0.5 + z / 6.0 + z**2 / 24.0 + z**3 / 120.0 + z**4 / 720.0
    return np.where(small, series, (np.expm1(zs) - zs) / zs**2)


# -- semigroups -------------------------------------------------------------

def heat_rate(grid, mu):
    return -mu * grid.k2


def damped_rate(grid, mu, r):
    return -(mu * grid.k2 + r)


def _check_time(t):
    if not t >= 0:
        raise ValueError(f"semigroup time must be >= 0, got {t}")


def heat_semigroup(grid, f, t, mu):
    """``exp(t mu lap) f``."""
    _check_time(t)
    return grid.inverse(np.exp(heat_rate(grid, mu) * t) * grid.forward(f))


def damped_semigroup(grid, f, t, mu, r):
    """``exp(t (mu lap - r)) f``."""
    _check_time(t)
    return grid.inverse(np.exp(damped_rate(grid, mu, r) * t) * grid.forward(f))


def heat_of_damped_source(grid, f, t, mu, r):
    """``int_0^t exp((t-s) mu lap) exp(s (mu lap - r)) f ds`` in closed form.

    The two semigroups commute, so the integral is
    ``exp(t mu lap) f * (1 - e^{-r t}) / r``.
    """
    _check_time(t)
    w = t if r == 0 else -math.expm1(-r * t) / r
    return w * heat_semigroup(grid, f, t, mu)


def duhamel_weights(rate, dt):
    """Exponentially weighted trapezoid weights for one step.

    Returns ``(E, a, b)`` with ``u_{j+1} = E u_j + a G_j + b G_{j+1}`` for a
    source linearly interpolated between samples.
    """
    z = rate * dt
    p1, p2 = phi1(z), phi2(z)
    return np.exp(z), dt * (p1 - p2), dt * p2


def duhamel_series_hat(rate, dt, source_hat, initial_hat=None):
    """Spectral Duhamel trajectory for sources sampled along axis 0.

    ``source_hat[j]`` is the spectrum of ``G(j dt)``; returns the spectra of
    ``u(j dt)`` for every ``j`` with ``u(0)`` given by ``initial_hat``
    (zero by default).
    """
    E, a, b = duhamel_weights(rate, dt)
    out = np.empty_like(source_hat, dtype=complex)
    out[0] = 0.0 if initial_hat is None else initial_hat
    for j in range(1, source_hat.shape[0]):
        out[j] = E * out[j - 1] + a * source_hat[j - 1] + b * source_hat[j]
    return out


def duhamel_integrate(grid, initial, source, dt, mu, r, trajectory=False):
    """Mild solution of ``du/dt = (mu lap - r) u + G``.

    ``source`` holds ``G`` at the times ``0, dt, ..., J dt``. Returns
    ``u(J dt)``, or the whole sampled trajectory when ``trajectory=True``.
    """
    source = np.asarray(source, dtype=float)
    initial = np.asarray(initial, dtype=float)
    if source.ndim < 1 or source.shape[1:] != initial.shape:
        raise ValueError(
            f"source samples {source.shape} do not match the field shape {initial.shape}"
        )
    if source.shape[0] < 1:
        raise ValueError("need at least one source sample")
    U = duhamel_series_hat(damped_rate(grid, mu, r), dt, grid.forward(source), grid.forward(initial))
    if trajectory:
        return grid.inverse(U)
    return grid.inverse(U[-1])


# -- time stepping ------------------------------------------------------------

@dataclass(frozen=True)
class StepperConfig:
    dt: float = 0.01
    T: float = 1.0
    scheme: str = "ETDRK2"
    output_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0 or not self.T > 0:
            raise ValueError("dt and T must be positive")
        if self.dt > self.T * (1 + 1e-12):
            raise ValueError(f"dt = {self.dt} exceeds T = {self.T}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if int(self.output_stride) < 1:
            raise ValueError("output_stride must be >= 1")

    @property
    def nsteps(self):
        return int(round(self.T / self.dt))

    def times(self):
        return np.arange(self.nsteps + 1) * self.dt

    def to_dict(self):
        return {"dt": self.dt, "T": self.T, "scheme": self.scheme, "output_stride": self.output_stride}


@dataclass
class Termination:
    """How a run ended: ``completed``, ``vacuum`` or ``blow-up``."""

    kind: str
    t: float
    step: int
    detail: str = ""


@dataclass
class Trajectory:
    system: str
    grid: object
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    termination: Termination | None = None
    max_cfl: float = 0.0

    @property
    def completed(self):
        return self.termination is not None and self.termination.kind == "completed"


def _etd_step(U, rates, nonlinear, dt, scheme, cache):
    """One ETD step for a list of spectral variables with diagonal rates."""
    key = dt
    if key not in cache:
        coeffs = []
        for lam in rates:
            z = lam * dt
            coeffs.append((np.exp(z), dt * phi1(z), dt * phi2(z)))
        cache[key] = coeffs
    coeffs = cache[key]
    N0 = nonlinear(U)
    A = [E * u + c1 * n for (E, c1, _), u, n in zip(coeffs, U, N0)]
    if scheme == "ETD1":
        return A
    N1 = nonlinear(A)
    return [a + c2 * (n1 - n0) for (_, _, c2), a, n0, n1 in zip(coeffs, A, N0, N1)]


class _MomentumSystem:
    """Momentum system in spectral variables ``(Q, M)``."""

    name = "momentum"

    def __init__(self, grid, p):
        p.require_constrained()
        self.g, self.p = grid, p
        self.rates = [heat_rate(grid, p.mu), damped_rate(grid, p.mu, p.r)[None]]

    def pack(self, s):
        return [self.g.forward(s.q), self.g.forward(s.m)]

    def unpack(self, U):
        return MomentumState(self.g, self.g.inverse(U[0]), self.g.inverse(U[1]))

    def nonlinear(self, U):
        g = self.g
        q, m = g.inverse(U[0]), g.inverse(U[1])
        return [-g.div_hat(U[1]), G_nonlinear_hat(g, q, m, self.p.floor)]

    def speed(self, U):
        g = self.g
        q, m = g.inverse(U[0]), g.inverse(U[1])
        return float(np.sqrt(np.sum(m**2, axis=0)).max() / (1.0 + q).min())

    def depth(self, U):
        return 1.0 + self.g.inverse(U[0])

    def fields(self, s):
        return {"q": s.q, "m": s.m, "h": s.h}


class _PrimitiveSystem:
    """Primitive system stepped in ``(h, w + mu grad h)`` with ``w = h u``.

    The shift by ``mu grad h`` is linear and diagonalizes the linearization
    about rest under the constrained coefficients; the full nonlinear
    right-hand side is still evaluated from the primitive equations.
    """

    name = "primitive"

    def __init__(self, grid, p, capillary_form="simplified"):
        self.g, self.p, self.cap = grid, p, capillary_form
        self.rates = [heat_rate(grid, p.mu), damped_rate(grid, p.mu, p.r)[None]]

    def pack(self, s):
        g = self.g
        H = g.forward(s.h)
        W = g.forward(s.h * s.u)
        return [H, W + self.p.mu * g.grad_hat(H)]

    def _hw(self, U):
        g = self.g
        W = U[1] - self.p.mu * g.grad_hat(U[0])
        return g.inverse(U[0]), g.inverse(W), W

    def unpack(self, U):
        h, w, _ = self._hw(U)
        check_floor(self.g, h, self.p.floor)
        return PrimitiveState(self.g, h, w / h)

    def nonlinear(self, U):
        g, p = self.g, self.p
        h, w, _ = self._hw(U)
        dh, dw = rhs_primitive_conserved(g, h, w, p, self.cap)
        DH = g.forward(dh)
        DM = g.forward(dw) + p.mu * g.grad_hat(DH)
        return [DH - self.rates[0] * U[0], DM - self.rates[1] * U[1]]

    def speed(self, U):
        h, w, _ = self._hw(U)
        return float(np.sqrt(np.sum(w**2, axis=0)).max() / h.min())

    def depth(self, U):
        return self.g.inverse(U[0])

    def fields(self, s):
        return {"h": s.h, "u": s.u}


def _diagnostics(system, s, t, p, besov):
    g = system.g
    row = {"t": t}
    if system.name == "primitive":
        row["energy"] = energy(s, p)
    row["mass"] = integrate(g, s.h)
    row["min_h"] = float(s.h.min())
    fields = system.fields(s)
    for name, spec in besov or ():
        key = f"{name}_B{spec.s:g}_{spec.p:g}_{spec.r:g}"
        row[key] = besov_value(g, fields[name], spec.s, spec.p, spec.r)
    return row


def evolve(system, state, p, cfg, besov=None, capillary_form="simplified", cfl_limit=0.5):
    """Integrate the primitive or momentum system.

    Parameters
    ----------
    system : {"primitive", "momentum"}
    state : PrimitiveState or MomentumState
    p : Params
    cfg : StepperConfig
    besov : list of (field name, BesovSpec), optional
        Norms recorded in the diagnostics at every output step.

    Returns
    -------
    Trajectory
        Snapshots every ``output_stride`` steps (and at the final step) with
        diagnostics. A vacuum breach or a non-finite state stops the run with
        a ``vacuum`` or ``blow-up`` termination record instead of raising.
    """
    g = state.grid
    if system == "momentum":
        sys_ = _MomentumSystem(g, p)
    elif system == "primitive":
        sys_ = _PrimitiveSystem(g, p, capillary_form)
    else:
        raise ValueError(f"unknown system {system!r}")
    traj = Trajectory(system=system, grid=g)
    U = sys_.pack(state)
    dt, nsteps = cfg.dt, cfg.nsteps
    cache = {}
    kmax = g.k_max_dealiased

    def record(step, s):
        t = step * dt
        traj.times.append(t)
        traj.states.append(s)
        traj.diagnostics.append(_diagnostics(sys_, s, t, p, besov))

    record(0, state)
    warned = False
    for step in range(1, nsteps + 1):
        cfl = sys_.speed(U) * dt * kmax
        traj.max_cfl = max(traj.max_cfl, cfl)
        if cfl > cfl_limit and not warned:
            log.warning("CFL number %.3g exceeds %.3g at t=%.4g", cfl, cfl_limit, (step - 1) * dt)
            warned = True
        try:
            U = _etd_step(U, sys_.rates, sys_.nonlinear, dt, cfg.scheme, cache)
            if not all(np.all(np.isfinite(u)) for u in U):
                traj.termination = Termination("blow-up", step * dt, step, "non-finite state")
                return traj
            check_floor(g, sys_.depth(U), p.floor)
            if step % cfg.output_stride == 0 or step == nsteps:
                record(step, sys_.unpack(U))
        except VacuumBreach as exc:
            t_fail = step * dt
            traj.termination = Termination("vacuum", t_fail, step, str(exc))
            return traj
        except (ValueError, FloatingPointError) as exc:
            if "non-finite" in str(exc):
                traj.termination = Termination("blow-up", step * dt, step, str(exc))
                return traj
            raise
    traj.termination = Termination("completed", nsteps * dt, nsteps)
    return traj
