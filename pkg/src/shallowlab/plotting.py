"""Figures written next to the CSV/JSON outputs (non-interactive backend)."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_SAVE = {"dpi": 110, "metadata": {"Software": None}}
_OUTCOME_MARK = {"converged": "o", "stalled": "s", "diverged": "x", "vacuum": "v"}


def plot_diagnostics(rows, path, title=""):
    """Energy, minimum depth, mass drift and tracked norms against time."""
    t = [r["t"] for r in rows]
    norm_keys = [k for k in rows[0] if "_B" in k] if rows else []
    panels = [("energy", "energy"), ("min_h", "min h")]
    panels = [p for p in panels if rows and p[0] in rows[0]]
    n = len(panels) + 1 + (1 if norm_keys else 0)
    fig, axes = plt.subplots(n, 1, figsize=(6, 2.2 * n), sharex=True, squeeze=False)
    axes = axes[:, 0]
    for ax, (key, label) in zip(axes, panels):
        ax.plot(t, [r[key] for r in rows])
        ax.set_ylabel(label)
    ax = axes[len(panels)]
    m0 = rows[0]["mass"] if rows else 0.0
    ax.plot(t, [r["mass"] - m0 for r in rows])
    ax.set_ylabel("mass drift")
    if norm_keys:
        ax = axes[-1]
        for k in norm_keys:
            ax.semilogy(t, [max(r[k], 1e-300) for r in rows], label=k)
        ax.set_ylabel("Besov norms")
        ax.legend(fontsize=7)
    axes[-1].set_xlabel("t")
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def plot_contraction(trace, path, title=""):
    """Successive differences and contraction ratios of a Picard run."""
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(6, 5))
    if trace.deltas:
        a1.semilogy(range(len(trace.deltas)), [max(d, 1e-300) for d in trace.deltas], "o-")
    a1.set_ylabel("successive difference")
    ratios = [r for r in trace.ratios if r is not None]
    if ratios:
        a2.plot(range(1, len(ratios) + 1), ratios, "s-")
        a2.axhline(1.0, color="k", lw=0.8, ls="--")
    a2.set_ylabel("ratio")
    a2.set_xlabel("iteration")
    a1.set_title(title or f"outcome: {trace.outcome}")
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def plot_sweep(results, path):
    """Maximum contraction ratio against amplitude for each depth family."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for res in results:
        line = None
        amps = [r.amplitude for r in res.rows if r.amplitude > 0]
        rat = [r.max_ratio for r in res.rows if r.amplitude > 0]
        if amps:
            (line,) = ax.loglog(amps, [max(v, 1e-6) for v in rat], lw=0.8,
                                label=f"{res.label} (min h0 = {res.min_h0:.2f})")
        for r in res.rows:
            if r.amplitude > 0:
                ax.plot(r.amplitude, max(r.max_ratio, 1e-6), _OUTCOME_MARK.get(r.outcome, "."),
                        color=line.get_color() if line else None)
        hi = res.bracket[1]
        if hi is not None and line is not None and math.isfinite(hi):
            ax.axvline(hi, color=line.get_color(), ls=":", lw=0.8)
    ax.axhline(1.0, color="k", lw=0.8, ls="--")
    ax.set_xlabel("momentum amplitude (critical norm)")
    ax.set_ylabel("max contraction ratio")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path
