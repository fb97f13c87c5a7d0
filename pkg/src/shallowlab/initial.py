"""Initial-data generators.

Every generator returns both the momentum view ``(q0, m0)`` and the
primitive view ``(h0, u0)`` together with the norms that document how large
the density perturbation and the momentum are.

Random fields are drawn on a fixed box of integer wavevectors, independent
of the grid resolution, so the same seed gives the same continuum function
on every grid that resolves the band.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grid import check_floor, spectral_gradient
from .littlewood_paley import besov_value
from .models import MomentumState, classical_momentum, momentum_to_primitive

GENERATORS = ("zero", "modes", "random_band", "large_gradient")


def _wave_phase(grid, wavevector, phase=0.0):
    X = grid.coords()
    arg = np.full(grid.shape, float(phase))
    for xj, kj, Lj in zip(X, wavevector, grid.L):
        arg = arg + (2.0 * np.pi / Lj) * kj * xj
    return arg


def cosine_mode(grid, wavevector, amplitude=1.0, phase=0.0):
    """``A cos(k . x + phase)`` with ``k`` an integer wavevector in units of ``2 pi / L``."""
    wavevector = tuple(wavevector)
    if len(wavevector) != grid.dim:
        raise ValueError(f"wavevector {wavevector} does not have {grid.dim} components")
    return amplitude * np.cos(_wave_phase(grid, wavevector, phase))


def random_coefficients(dim, rng, k_min, k_max):
    """Hermitian coefficients on the box ``|k_j| <= k_max``, zero outside the shell.

    The shell is ``k_min <= |k| <= k_max`` in integer-index magnitude. Returns
    an array of shape ``(2 k_max + 1,) * dim`` indexed by ``k + k_max``.
    """
    K = int(k_max)
    shape = (2 * K + 1,) * dim
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    flipped = z[(slice(None, None, -1),) * dim]
    c = 0.5 * (z + np.conj(flipped))
    idx = np.meshgrid(*([np.arange(-K, K + 1)] * dim), indexing="ij")
    mag = np.sqrt(sum(i.astype(float) ** 2 for i in idx))
    c[(mag < k_min) | (mag > k_max)] = 0.0
    return c


def field_from_coefficients(grid, coeffs):
    """Place box coefficients onto the grid spectrum and transform back."""
    K = (coeffs.shape[0] - 1) // 2
    for n in grid.n:
        if K >= n // 2:
            raise ValueError(f"band |k| <= {K} not resolved by {grid.ident}")
    F = np.zeros(grid.shape, dtype=complex)
    pos = [np.arange(-K, K + 1) % n for n in grid.n]
    F[np.ix_(*pos)] = coeffs
    return grid.inverse(F)


def random_band_field(grid, rng, k_min, k_max, amplitude):
    """Random real trigonometric polynomial with ``sum |c_k| = amplitude``.

    The coefficient l1 norm bounds the sup norm, so ``|f| <= amplitude``
    pointwise.
    """
    c = random_coefficients(grid.dim, rng, k_min, k_max)
    total = np.abs(c).sum()
    if total == 0:
        raise ValueError(f"no integer wavevectors in the shell [{k_min}, {k_max}]")
    return field_from_coefficients(grid, c * (amplitude / total))


@dataclass
class InitialData:
    momentum: MomentumState
    primitive: object
    norms: dict
    min_h0: float

    def summary(self):
        return {**self.norms, "min_h0": self.min_h0}


def _modes_sum(grid, modes, field):
    out = np.zeros(grid.shape)
    for md in modes:
        if md.get("field", "q") != field:
            continue
        out = out + cosine_mode(grid, md["wavevector"], md.get("amplitude", 1.0), md.get("phase", 0.0))
    return out


def _momentum_from_modes(grid, modes):
    return np.stack([_modes_sum(grid, modes, f"m{j + 1}") for j in range(grid.dim)])


def _rescale(grid, m0, norm):
    if norm is None:
        return m0
    cur = besov_value(grid, m0, grid.dim / 2.0 - 1.0)
    if cur == 0:
        if norm == 0:
            return m0
        raise ConfigError(["momentum: cannot rescale a zero direction to a nonzero norm"])
    return m0 * (norm / cur)


def momentum_field(grid, spec, rng):
    """Momentum from a sub-spec ``{modes: [...], norm: float | None}``
    or ``{random_band: {...}, norm: ...}``."""
    if not spec:
        return np.zeros((grid.dim, *grid.shape))
    if "random_band" in spec:
        rb = spec["random_band"]
        m0 = np.stack(
            [random_band_field(grid, rng, rb["k_min"], rb["k_max"], rb["amplitude"]) for _ in range(grid.dim)]
        )
    else:
        m0 = _momentum_from_modes(grid, spec.get("modes", []))
    return _rescale(grid, m0, spec.get("norm"))


def generate_initial(spec, grid, p):
    """Build ``InitialData`` from an initial-data spec (a plain dict).

    Generators: ``zero``; ``modes`` (list of ``{field, wavevector,
    amplitude, phase}`` with field ``q`` or ``m1..m3``); ``random_band``
    (``k_min, k_max, amplitude`` for q and ``m_amplitude`` for m, drawn from
    ``seed``); ``large_gradient`` (``h0 = 1 + A cos(k . x)`` with the
    momentum from the ``momentum`` sub-spec).
    """
    gen = spec.get("generator", "zero")
    rng = np.random.default_rng(spec.get("seed", 0))
    if gen == "zero":
        q0 = np.zeros(grid.shape)
        m0 = np.zeros((grid.dim, *grid.shape))
    elif gen == "modes":
        q0 = _modes_sum(grid, spec.get("modes", []), "q")
        m0 = _momentum_from_modes(grid, spec.get("modes", []))
    elif gen == "random_band":
        km, kM = spec.get("k_min", 1), spec.get("k_max", 4)
        q0 = random_band_field(grid, rng, km, kM, spec.get("amplitude", 0.1))
        ma = spec.get("m_amplitude", spec.get("amplitude", 0.1))
        m0 = np.stack([random_band_field(grid, rng, km, kM, ma) for _ in range(grid.dim)])
    elif gen == "large_gradient":
        k = spec.get("k", [1] + [0] * (grid.dim - 1))
        if isinstance(k, int):
            k = [k] + [0] * (grid.dim - 1)
        q0 = cosine_mode(grid, k, spec.get("A", 0.9))
        m0 = momentum_field(grid, spec.get("momentum"), rng)
    else:
        raise ConfigError([f"initial.generator must be one of {GENERATORS}, got {gen!r}"])
    check_floor(grid, 1.0 + q0, p.floor)
    ms = MomentumState(grid, q0, m0)
    ps = momentum_to_primitive(ms, p)
    d = grid.dim / 2.0
    mc = classical_momentum(ms, p)
    norms = {
        "q0_B": besov_value(grid, q0, d),
        "m0_B": besov_value(grid, m0, d - 1.0),
        "classical_m0_B": besov_value(grid, mc, d - 1.0),
        "grad_h0_B": besov_value(grid, spectral_gradient(grid, 1.0 + q0), d - 1.0),
    }
    return InitialData(ms, ps, norms, float((1.0 + q0).min()))

