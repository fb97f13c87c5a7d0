"""Dyadic frequency decomposition, Besov and Chemin-Lerner norms.

The cutoff ``chi`` is radial, equal to 1 for ``|xi| <= 3/4`` and 0 for
``|xi| >= 4/3``, joined by a C-infinity exponential smooth-step. The ring
function ``phi(xi) = chi(xi/2) - chi(xi)`` is supported in the annulus
``3/4 <= |xi| <= 8/3`` and ``sum_l phi(2^-l xi) = 1`` for ``xi != 0``.

On the torus the zero mode is not seen by any block; every norm here is the
homogeneous norm of the mean-free part.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import trapezoid

CHI_IN = 0.75
CHI_OUT = 4.0 / 3.0


def smooth_step(t):
    """C-infinity step: 1 for ``t <= 0``, 0 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, 0.0, 1.0)

    def f(x):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)

    a, b = f(1.0 - tc), f(tc)
    return a / (a + b)


def chi(xi):
    """Radial low-pass cutoff evaluated at ``|xi|``."""
    return smooth_step((np.abs(xi) - CHI_IN) / (CHI_OUT - CHI_IN))


def phi(xi):
    """Ring function ``chi(xi/2) - chi(xi)`` evaluated at ``|xi|``."""
    xi = np.abs(xi)
    return chi(xi / 2.0) - chi(xi)


@dataclass(frozen=True)
class BesovSpec:
    """Index triple ``(s, p, r)``; ``p`` and ``r`` may be ``math.inf``."""

    s: float
    p: float = 2.0
    r: float = 1.0

    def __post_init__(self):
        for name in ("p", "r"):
            v = float(getattr(self, name))
            if not v >= 1.0:
                raise ValueError(f"{name} must be >= 1 (or inf), got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "s", float(self.s))

    def to_dict(self):
        return {"s": self.s, "p": _enc(self.p), "r": _enc(self.r)}

    @classmethod
    def from_dict(cls, d):
        return cls(s=float(d["s"]), p=_dec(d.get("p", 2)), r=_dec(d.get("r", 1)))


def _enc(v):
    return "inf" if math.isinf(v) else v


def _dec(v):
    return math.inf if v in ("inf", "Infinity", math.inf) else float(v)


def lp_sum(values, r):
    """``(sum v^r)^(1/r)``, or ``max`` for ``r = inf``."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    if math.isinf(r):
        return float(values.max())
    if r == 1.0:
        return float(values.sum())
    return float(np.sum(values**r) ** (1.0 / r))


@dataclass
class NormReport:
    """Per-block breakdown of a Besov (or Chemin-Lerner) norm."""

    spec: BesovSpec
    levels: list
    values: list
    aggregate: float
    grid_id: str = ""
    rho: float | None = None
    note: str = ""

    def recompute(self):
        return lp_sum(self.values, self.spec.r)

    def to_dict(self):
        out = {
            "spec": self.spec.to_dict(),
            "blocks": [{"l": int(l), "value": float(v)} for l, v in zip(self.levels, self.values)],
            "aggregate": float(self.aggregate),
            "grid": self.grid_id,
        }
        if self.rho is not None:
            out["rho"] = _enc(self.rho)
        if self.note:
            out["note"] = self.note
        return out

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        blocks = d["blocks"]
        return cls(
            spec=BesovSpec.from_dict(d["spec"]),
            levels=[int(b["l"]) for b in blocks],
            values=[float(b["value"]) for b in blocks],
            aggregate=float(d["aggregate"]),
            grid_id=d.get("grid", ""),
            rho=_dec(d["rho"]) if "rho" in d else None,
            note=d.get("note", ""),
        )


@dataclass(frozen=True, eq=False)
class DyadicMultiplier:
    """Block multipliers ``phi(2^-l |k|)`` for every block a grid resolves."""

    grid: object
    l_min: int
    l_max: int
    weights: tuple = field(repr=False)

    @property
    def levels(self):
        return list(range(self.l_min, self.l_max + 1))

    def weight(self, l):
        if l < self.l_min or l > self.l_max:
            return np.zeros(self.grid.shape)
        return self.weights[l - self.l_min]

    def partition_sum(self):
        total = np.zeros(self.grid.shape)
        for w in self.weights:
            total = total + w
        return total

    def low_weight(self, l):
        """Multiplier of ``S_l``, which is ``chi(2^-l |k|)`` (mean included)."""
        return chi(self.grid.kmag * 2.0 ** (-l))


@lru_cache(maxsize=32)
def build_multiplier(grid, min_blocks=3):
    """Construct the dyadic multiplier for ``grid``.

    ``l_min`` is the lowest block that still has the full partition of unity
    on every nonzero grid mode (``(4/3) 2^l_min <= k_min``); every block below
    it vanishes on the grid. ``l_max`` is the highest block touching a grid
    mode.
    """
    l_min = math.floor(math.log2(grid.k_min / CHI_OUT) + 1e-12)
    l_max = math.ceil(math.log2(grid.k_max / CHI_IN) - 1e-12) - 1
    # guard against log rounding at exact powers of two
    while phi(grid.k_min * 2.0 ** (-(l_min - 1))) > 0:
        l_min -= 1
    while grid.k_max * 2.0 ** (-(l_max + 1)) > CHI_IN:
        l_max += 1
    if l_max - l_min + 1 < min_blocks:
        raise ValueError(
            f"grid {grid.ident} hosts only {l_max - l_min + 1} dyadic blocks (< {min_blocks})"
        )
    kmag = grid.kmag
    weights = tuple(phi(kmag * 2.0 ** (-l)) for l in range(l_min, l_max + 1))
    return DyadicMultiplier(grid=grid, l_min=l_min, l_max=l_max, weights=weights)


def dyadic_block(grid, u, l):
    """``Delta_l u``: multiply by ``phi(2^-l D)``."""
    mult = build_multiplier(grid)
    return grid.inverse(mult.weight(l) * grid.forward(u))


def low_freq(grid, u, l):
    """``S_l u = sum_{k <= l-1} Delta_k u`` plus the mean, i.e. ``chi(2^-l D) u``."""
    mult = build_multiplier(grid)
    return grid.inverse(mult.low_weight(l) * grid.forward(u))


def block_l2_from_hat(grid, U, mult=None):
    """Per-block L2 norms from spectral coefficients via Parseval.

    ``U`` may carry leading axes (components, time); only the trailing
    ``dim`` axes are summed. Returns shape ``(*leading, nblocks)``.
    """
    mult = mult or build_multiplier(grid)
    ax = tuple(range(U.ndim - grid.dim, U.ndim))
    power = np.abs(U) ** 2
    out = [np.sum(power * (w * w), axis=ax) for w in mult.weights]
    return np.sqrt(np.stack(out, axis=-1) * grid.volume)


def block_norms(grid, u, p=2.0, vector=None):
    """Per-block ``|| Delta_l u ||_{L^p}`` for ``l = l_min..l_max``.

    Vector fields (leading axis of length ``dim``) use the pointwise
    Euclidean norm. ``p = 2`` goes through Parseval; other ``p`` transform
    each block back and use grid quadrature.
    """
    u = np.asarray(u, dtype=float)
    if vector is None:
        vector = u.ndim == grid.dim + 1
    mult = build_multiplier(grid)
    U = grid.forward(u)
    if p == 2.0:
        b = block_l2_from_hat(grid, U, mult)
        if vector:
            b = np.sqrt(np.sum(b**2, axis=0))
        return b
    out = []
    for w in mult.weights:
        blk = grid.inverse(w * U)
        mag = np.sqrt(np.sum(blk**2, axis=0)) if vector else np.abs(blk)
        out.append(lp_norm_values(grid, mag, p))
    return np.asarray(out)


def lp_norm_values(grid, mag, p):
    """L^p norm of a nonnegative sample array by quadrature."""
    if math.isinf(p):
        return float(mag.max())
    return float((np.sum(mag**p) * grid.cell_volume) ** (1.0 / p))


def lp_norm(grid, u, p):
    """L^p norm of a scalar or vector field (pointwise Euclidean for vectors)."""
    u = np.asarray(u, dtype=float)
    mag = np.sqrt(np.sum(u**2, axis=0)) if u.ndim == grid.dim + 1 else np.abs(u)
    return lp_norm_values(grid, mag, p)


def weighted(levels, values, s):
    return np.asarray(values) * 2.0 ** (s * np.asarray(levels, dtype=float))


def besov_norm(grid, u, spec):
    """Homogeneous Besov norm ``B^s_{p,r}`` with its per-block breakdown."""
    mult = build_multiplier(grid)
    raw = block_norms(grid, u, spec.p)
    vals = weighted(mult.levels, raw, spec.s)
    note = "" if spec.p in (2.0,) or math.isinf(spec.p) else "L^p by grid quadrature"
    return NormReport(
        spec=spec,
        levels=mult.levels,
        values=[float(v) for v in vals],
        aggregate=lp_sum(vals, spec.r),
        grid_id=grid.ident,
        note=note,
    )


def besov_value(grid, u, s, p=2.0, r=1.0):
    """Shortcut returning only the aggregate."""
    return besov_norm(grid, u, BesovSpec(s, p, r)).aggregate


def time_lp(values, times, rho):
    """L^rho in time of sampled nonnegative values along axis 0.

    Trapezoid rule in time; ``max`` for ``rho = inf``.
    """
    values = np.asarray(values, dtype=float)
    if math.isinf(rho):
        return values.max(axis=0)
    times = np.asarray(times, dtype=float)
    if len(times) == 1:
        return np.zeros(values.shape[1:])
    integ = trapezoid(values**rho, times, axis=0)
    return integ ** (1.0 / rho)


def chemin_lerner_from_blocks(levels, block_series, times, rho, spec):
    """Chemin-Lerner norm from a ``(ntimes, nblocks)`` array of block L^p norms."""
    per_block = time_lp(block_series, times, rho)
    vals = weighted(levels, per_block, spec.s)
    return vals, lp_sum(vals, spec.r)


def block_series(grid, series, p=2.0, vector=None):
    """``(ntimes, nblocks)`` array of block L^p norms for a time series of fields."""
    series = np.asarray(series, dtype=float)
    if series.shape[0] == 0:
        raise ValueError("empty time series")
    if vector is None:
        vector = series.ndim == grid.dim + 2
    if p == 2.0:
        U = grid.forward(series)
        b = block_l2_from_hat(grid, U)
        if vector:
            b = np.sqrt(np.sum(b**2, axis=1))
        return b
    return np.stack([block_norms(grid, f, p, vector=vector) for f in series])


def chemin_lerner_norm(grid, series, times, rho, spec):
    """``L~^rho_T(B^s_{p,r})`` norm of a uniformly sampled time series.

    The L^rho time norm is taken block by block (trapezoid in time) before
    the weighted l^r sum over blocks.
    """
    series = np.asarray(series, dtype=float)
    if series.size == 0 or series.shape[0] == 0:
        raise ValueError("empty time series")
    times = np.asarray(times, dtype=float)
    if times.shape[0] != series.shape[0]:
        raise ValueError(f"{series.shape[0]} samples but {times.shape[0]} times")
    mult = build_multiplier(grid)
    bs = block_series(grid, series, spec.p)
    vals, agg = chemin_lerner_from_blocks(mult.levels, bs, times, rho, spec)
    return NormReport(
        spec=spec,
        levels=mult.levels,
        values=[float(v) for v in vals],
        aggregate=agg,
        grid_id=grid.ident,
        rho=float(rho),
    )


def time_lp_of_besov_from_blocks(levels, block_series, times, rho, spec):
    """``L^rho_T(B^s_{p,r})`` from a ``(ntimes, nblocks)`` array of block norms."""
    w = 2.0 ** (spec.s * np.asarray(levels, dtype=float))
    weighted_rows = np.asarray(block_series) * w
    if math.isinf(spec.r):
        pointwise = weighted_rows.max(axis=1)
    else:
        pointwise = np.sum(weighted_rows**spec.r, axis=1) ** (1.0 / spec.r)
    return float(time_lp(pointwise[:, None], times, rho)[0])


def time_lp_of_besov(grid, series, times, rho, spec):
    """Ordinary ``L^rho_T(B^s_{p,r})`` norm: Besov norm at each time, then L^rho."""
    mult = build_multiplier(grid)
    bs = block_series(grid, series, spec.p)
    return time_lp_of_besov_from_blocks(mult.levels, bs, times, rho, spec)
