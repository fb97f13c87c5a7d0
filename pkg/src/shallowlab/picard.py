"""Picard iteration for the momentum system, mirroring the existence argument.

The iterate ``(q^{n+1}, m^{n+1}) = (q^0, m^0) + (qbar^{n+1}, mbar^{n+1})``
solves the linear problems

    d_t mbar - mu lap mbar + r mbar = G^n,   mbar(0) = 0
    d_t qbar - mu lap qbar + div mbar = 0,   qbar(0) = 0

with the frozen source ``G^n = -div(m^n (x) m^n / (1 + q^n))``, on a uniform
time grid ``t_j = j dt`` in ``[0, T]``. Everything is measured in a single
discrete working norm.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import VacuumBreach
from .littlewood_paley import BesovSpec, besov_value, block_l2_from_hat, build_multiplier, chemin_lerner_from_blocks
from .models import G_nonlinear_hat, MomentumState
from .propagators import StepperConfig, damped_rate, duhamel_series_hat, evolve, heat_rate

log = logging.getLogger(__name__)

RATIO_DEFINED = 1e-14
STALL_BAND = (0.95, 1.05)
STALL_RUN = 5
HUGE = 1e8


def default_horizon(r):
    """Window for the working norms: ``min(1, 3/r)``."""
    return 1.0 if r <= 0 else min(1.0, 3.0 / r)


@dataclass
class TrajectoryPair:
    """Sampled ``(q, m)`` on ``t_j = j dt``; arrays carry time on axis 0."""

    grid: object
    times: np.ndarray
    q: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        g = self.grid
        nt = len(self.times)
        if self.q.shape != (nt, *g.shape) or self.m.shape != (nt, g.dim, *g.shape):
            raise ValueError("trajectory arrays do not match the grid and time samples")

    def __sub__(self, other):
        return TrajectoryPair(self.grid, self.times, self.q - other.q, self.m - other.m)

    def __add__(self, other):
        return TrajectoryPair(self.grid, self.times, self.q + other.q, self.m + other.m)

    @property
    def dt(self):
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def min_h(self):
        return float((1.0 + self.q).min())

    def state(self, j):
        return MomentumState(self.grid, self.q[j], self.m[j])


@dataclass(frozen=True)
class WorkingNorm:
    """Composite working-space norm with its four pieces."""

    q_sup: float
    q_l1: float
    m_sup: float
    m_l1: float

    @property
    def value(self):
        return self.q_sup + self.q_l1 + self.m_sup + self.m_l1

    def to_dict(self):
        return {**asdict(self), "value": self.value}


def working_norm(pair):
    """``||q||_{L~inf(B^{N/2})} + ||q||_{L1(B^{N/2+2})} + ||m||_{L~inf(B^{N/2-1})}
    + ||m||_{L1(B^{N/2+1})} + ||m||_{L1(B^{N/2-1})}``, all with ``p = 2, r = 1``."""
    g = pair.grid
    mult = build_multiplier(g)
    lv, t = mult.levels, pair.times
    d = g.dim / 2.0
    bq = block_l2_from_hat(g, g.forward(pair.q), mult)
    bm = np.sqrt(np.sum(block_l2_from_hat(g, g.forward(pair.m), mult) ** 2, axis=1))

    def cl(b, rho, s):
        return float(chemin_lerner_from_blocks(lv, b, t, rho, BesovSpec(s, 2, 1))[1])

    return WorkingNorm(
        q_sup=cl(bq, math.inf, d),
        q_l1=cl(bq, 1, d + 2),
        m_sup=cl(bm, math.inf, d - 1),
        m_l1=cl(bm, 1, d + 1) + cl(bm, 1, d - 1),
    )


def _time_grid(cfg):
    return np.arange(cfg.nsteps + 1) * cfg.dt


def linear_seed(grid, q0, m0, p, cfg):
    """Closed-form solution of the linear seed problem on the stepper time grid.

    ``m^0(t) = e^{t(mu lap - r)} m0`` and
    ``q^0(t) = e^{t mu lap}(q0 - w(t) div m0)`` with ``w(t) = (1 - e^{-rt})/r``.
    """
    p.require_constrained()
    grid.check_scalar(q0)
    grid.check_vector(m0)
    t = _time_grid(cfg)
    tt = t.reshape((-1,) + (1,) * grid.dim)
    M0, Q0 = grid.forward(m0), grid.forward(q0)
    w = tt if p.r == 0 else -np.expm1(-p.r * tt) / p.r
    Mt = np.exp(damped_rate(grid, p.mu, p.r)[None] * tt[:, None]) * M0[None]
    Qt = np.exp(heat_rate(grid, p.mu) * tt) * (Q0[None] - w * grid.div_hat(M0)[None])
    return TrajectoryPair(grid, t, grid.inverse(Qt), grid.inverse(Mt))


def correction(prev, p):
    """``(qbar^{n+1}, mbar^{n+1})`` driven by the source frozen at ``prev``."""
    g, dt = prev.grid, prev.dt
    G = np.empty((len(prev.times), g.dim, *g.shape), dtype=complex)
    for j in range(len(prev.times)):
        G[j] = G_nonlinear_hat(g, prev.q[j], prev.m[j], p.floor)
    if len(prev.times) == 1:
        zero = np.zeros_like(prev.q), np.zeros_like(prev.m)
        return TrajectoryPair(g, prev.times, *zero)
    Mbar = duhamel_series_hat(damped_rate(g, p.mu, p.r)[None], dt, G)
    Qbar = duhamel_series_hat(heat_rate(g, p.mu), dt, -np.stack([g.div_hat(M) for M in Mbar]))
    return TrajectoryPair(g, prev.times, g.inverse(Qbar), g.inverse(Mbar))


def picard_step(prev, seed, p):
    """Next iterate: ``seed + correction(prev)``; returns ``(iterate, correction)``."""
    bar = correction(prev, p)
    return seed + bar, bar


@dataclass
class IterationTrace:
    iterate_norms: list = field(default_factory=list)  # working norm of (qbar^n, mbar^n), n >= 1
    pieces: list = field(default_factory=list)
    deltas: list = field(default_factory=list)  # ||x^{n+1} - x^n||, n >= 0
    ratios: list = field(default_factory=list)
    min_h: list = field(default_factory=list)
    outcome: str = "stalled"
    iterations: int = 0
    monotone: bool = True
    note: str = ""
    seed_norm: float = float("nan")
    residual_vs_evolve: float | None = None

    @property
    def max_ratio(self):
        finite = [r for r in self.ratios if r is not None]
        return max(finite) if finite else 0.0

    def induction_bound(self):
        """``eps = ||(qbar^1, mbar^1)|| / (1 - max ratio)``, or ``inf`` if not contracting."""
        if not self.iterate_norms:
            return 0.0
        rho = self.max_ratio
        return self.iterate_norms[0] / (1.0 - rho) if rho < 1 else math.inf

    def induction_holds(self):
        eps = self.induction_bound()
        return all(v <= eps * (1 + 1e-12) + 1e-300 for v in self.iterate_norms)

    def to_dict(self):
        d = asdict(self)
        d["max_ratio"] = self.max_ratio
        d["induction_bound"] = self.induction_bound()
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), default=_json_default, **kw)


def _json_default(o):
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


@dataclass
class PicardResult:
    trajectory: TrajectoryPair
    trace: IterationTrace
    seed: TrajectoryPair

    @property
    def converged(self):
        return self.trace.outcome == "converged"


def _ratio(d_new, d_old):
    return d_new / d_old if d_old > RATIO_DEFINED else None


def run_picard(grid, q0, m0, p, cfg, tol=1e-10, max_iter=30, compare_evolve=False, evolve_refine=4):
    """Iterate to a fixed point and classify the outcome.

    ``converged`` needs ``delta^n < tol (1 + ||x^{n+1}||)`` with monotone
    successive differences; two consecutive ratios above one, a non-finite
    or huge iterate give ``diverged``; five consecutive ratios within
    ``[0.95, 1.05]`` or running out of iterations give ``stalled``; a depth
    at or below the floor gives ``vacuum``.

    With ``compare_evolve`` the converged fixed point is compared with the
    time stepper run at ``dt / evolve_refine``; the largest sup-norm gap in
    ``(q, m)`` over the samples is stored in the trace.
    """
    seed = linear_seed(grid, q0, m0, p, cfg)
    trace = IterationTrace(seed_norm=working_norm(seed).value)
    x = seed
    stall = 0
    for it in range(max_iter):
        trace.min_h.append(x.min_h())
        try:
            x_new, bar = picard_step(x, seed, p)
        except VacuumBreach as exc:
            trace.outcome, trace.iterations, trace.note = "vacuum", it, str(exc)
            return PicardResult(x, trace, seed)
        trace.iterations = it + 1
        if not (np.all(np.isfinite(x_new.q)) and np.all(np.isfinite(x_new.m))):
            trace.outcome, trace.note = "diverged", "non-finite iterate"
            return PicardResult(x, trace, seed)
        wn = working_norm(bar)
        trace.iterate_norms.append(wn.value)
        trace.pieces.append(wn.to_dict())
        delta = working_norm(x_new - x).value
        trace.deltas.append(delta)
        if len(trace.deltas) > 1:
            rho = _ratio(delta, trace.deltas[-2])
            trace.ratios.append(rho)
            if rho is not None and rho >= 1.0:
                trace.monotone = False
        x = x_new
        total = working_norm(x).value
        if not math.isfinite(total) or total > HUGE * (1.0 + trace.seed_norm):
            trace.outcome, trace.note = "diverged", "iterate norm blew up"
            return PicardResult(x, trace, seed)
        if delta < tol * (1.0 + total):
            if trace.monotone:
                trace.outcome = "converged"
            else:
                trace.outcome, trace.note = "stalled", "tolerance met with non-monotone differences"
            break
        rs = [r for r in trace.ratios[-2:] if r is not None]
        if len(trace.ratios) >= 2 and len(rs) == 2 and all(r > 1.0 for r in rs):
            trace.outcome, trace.note = "diverged", "two consecutive ratios above one"
            return PicardResult(x, trace, seed)
        last = trace.ratios[-1] if trace.ratios else None
        stall = stall + 1 if last is not None and STALL_BAND[0] <= last <= STALL_BAND[1] else 0
        if stall >= STALL_RUN:
            trace.outcome, trace.note = "stalled", "ratios near one"
            return PicardResult(x, trace, seed)
    else:
        trace.outcome, trace.note = "stalled", "max_iter reached"
    trace.min_h.append(x.min_h())
    if trace.outcome == "converged" and compare_evolve:
        trace.residual_vs_evolve = residual_vs_evolve(x, p, cfg, evolve_refine)
    return PicardResult(x, trace, seed)


def residual_vs_evolve(pair, p, cfg, refine=4):
    """Largest sup-norm gap between ``pair`` and a finer time-stepper run."""
    fine = StepperConfig(dt=cfg.dt / refine, T=cfg.nsteps * cfg.dt, scheme="ETDRK2", output_stride=refine)
    tr = evolve("momentum", pair.state(0), p, fine)
    if not tr.completed:
        return math.inf
    gap = 0.0
    for j, s in enumerate(tr.states):
        gap = max(gap, float(np.abs(s.q - pair.q[j]).max()), float(np.abs(s.m - pair.m[j]).max()))
    return gap


# -- smallness threshold -------------------------------------------------------

def scale_to_norm(grid, direction, amplitude):
    """Rescale a momentum direction to ``||m0||_{B^{N/2-1}_{2,1}} = amplitude``."""
    nrm = besov_value(grid, direction, grid.dim / 2.0 - 1.0, 2.0, 1.0)
    if nrm == 0:
        raise ValueError("momentum direction has zero norm")
    return direction * (amplitude / nrm)


@dataclass
class SweepRow:
    amplitude: float
    outcome: str
    iterations: int
    max_ratio: float
    final_norm: float
    min_h: float


@dataclass
class SweepResult:
    label: str
    min_h0: float
    q0_norm: float
    rows: list
    bracket: tuple
    violations: list
    traces: list

    @property
    def finite(self):
        return self.bracket[1] is not None

    def csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["family", "amplitude", "outcome", "iterations", "max_ratio", "final_norm", "min_h"])
        for r in self.rows:
            w.writerow([self.label, repr(r.amplitude), r.outcome, r.iterations,
                        repr(r.max_ratio), repr(r.final_norm), repr(r.min_h)])
        return buf.getvalue()

    def to_dict(self):
        return {
            "label": self.label,
            "min_h0": self.min_h0,
            "q0_norm": self.q0_norm,
            "bracket": list(self.bracket),
            "violations": self.violations,
            "rows": [asdict(r) for r in self.rows],
            "traces": [t.to_dict() for t in self.traces],
        }


def bracket_of(rows):
    """``(largest converged below the first failure, first failure)``.

    Converged amplitudes above the first failure break monotonicity and are
    returned as violations rather than dropped.
    """
    lo, hi = None, None
    for r in rows:
        if r.outcome == "converged":
            if hi is None:
                lo = r.amplitude
        elif hi is None:
            hi = r.amplitude
    violations = [r.amplitude for r in rows if hi is not None and r.amplitude > hi and r.outcome == "converged"]
    return (lo, hi), violations


def threshold_sweep(grid, q0, direction, amplitudes, p, cfg, tol=1e-10, max_iter=30, label="", workers=1):
    """Run Picard for ``m0 = a * direction`` (normalized) at every amplitude."""
    amps = [float(a) for a in amplitudes]
    if any(b < a for a, b in zip(amps, amps[1:])):
        raise ValueError("amplitudes must be sorted ascending")

    def one(a):
        m0 = np.zeros((grid.dim, *grid.shape)) if a == 0 else scale_to_norm(grid, direction, a)
        return run_picard(grid, q0, m0, p, cfg, tol=tol, max_iter=max_iter)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(one, amps))
    else:
        results = [one(a) for a in amps]
    rows = []
    for a, res in zip(amps, results):
        t = res.trace
        fn = working_norm(res.trajectory).value if t.outcome != "vacuum" else float("nan")
        rows.append(SweepRow(a, t.outcome, t.iterations, t.max_ratio, fn, min(t.min_h) if t.min_h else float("nan")))
    bracket, violations = bracket_of(rows)
    if violations:
        log.warning("sweep %s: converged above first failure at %s", label, violations)
    return SweepResult(
        label=label,
        min_h0=float((1.0 + q0).min()),
        q0_norm=besov_value(grid, q0, grid.dim / 2.0, 2.0, 1.0),
        rows=rows,
        bracket=bracket,
        violations=violations,
        traces=[r.trace for r in results],
    )


def family_trend(results):
    """Check that the upper bracket end does not grow as ``1/min h0`` grows.

    Returns ``(pairs, nonincreasing)`` where ``pairs`` lists
    ``(1/min h0, upper end)`` sorted by the first entry.
    """
    pairs = sorted((1.0 / r.min_h0, r.bracket[1]) for r in results)
    ends = [e for _, e in pairs]
    ok = all(e is not None for e in ends) and all(b <= a for a, b in zip(ends, ends[1:]))
    strict = ok and ends[-1] < ends[0]
    return pairs, bool(strict)
