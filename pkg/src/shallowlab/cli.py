"""Command-line driver: ``shallowlab {simulate,besov,picard,sweep,verify}``.

Every subcommand reads one JSON config, writes its outputs under the output
directory, and finishes with ``manifest.json`` (config copy, code version,
seed and a SHA-256 of every data file) so the directory can be regenerated
and diffed.

Exit codes: 0 success, 2 configuration error, 3 vacuum or blow-up,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .checks import REGISTRY, run_checks
from .config import default_config, parse_config
from .errors import ConfigError, ShallowLabError, VacuumBreach
from .fieldio import read_field, write_field
from .grid import l2_norm
from .initial import cosine_mode, generate_initial, momentum_field
from .littlewood_paley import besov_norm
from .picard import family_trend, run_picard, threshold_sweep
from .propagators import StepperConfig, evolve, heat_semigroup

EXIT_OK, EXIT_CONFIG, EXIT_TERMINATED, EXIT_VERIFY = 0, 2, 3, 4
DATA_SUFFIXES = (".csv", ".json", ".evf1")

log = logging.getLogger("shallowlab")


def _dump(path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _write_csv(path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return path


def file_digests(out):
    """SHA-256 of every data file below ``out`` except the manifest itself."""
    out = Path(out)
    digests = {}
    for f in sorted(out.rglob("*")):
        if f.is_file() and f.suffix in DATA_SUFFIXES and f.name != "manifest.json":
            digests[str(f.relative_to(out))] = hashlib.sha256(f.read_bytes()).hexdigest()
    return digests


def write_manifest(out, command, cfg, extra=None):
    manifest = {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "outputs": file_digests(out),
        "numpy": np.__version__,
    }
    if extra:
        manifest.update(extra)
    return _dump(Path(out) / "manifest.json", manifest)


# -- subcommands ------------------------------------------------------------------

def _field_views(system, state):
    if system == "primitive":
        out = {"h": state.h}
        comps = state.u
        name = "u"
    else:
        out = {"q": state.q}
        comps = state.m
        name = "m"
    for j, c in enumerate(comps):
        out[f"{name}{j + 1}"] = c
    return out


def cmd_simulate(cfg, out):
    g, p, st = cfg.make_grid(), cfg.make_params(), cfg.make_stepper()
    init = generate_initial(cfg.initial, g, p)
    state = init.primitive if cfg.system == "primitive" else init.momentum
    tr = evolve(cfg.system, state, p, st, besov=cfg.besov_tracks())
    h0 = state.h
    rows = []
    for d, s in zip(tr.diagnostics, tr.states):
        row = dict(d)
        row["h_heat_error"] = l2_norm(g, s.h - heat_semigroup(g, h0, d["t"], p.mu))
        rows.append(row)
    header = list(rows[0])
    _write_csv(out / "diagnostics.csv", header, [[r.get(k, "") for k in header] for r in rows])
    if cfg.diagnostics["snapshots"]:
        snap = out / "snapshots"
        snap.mkdir(exist_ok=True)
        for d, s in zip(tr.diagnostics, tr.states):
            step = int(round(d["t"] / st.dt))
            for name, f in _field_views(cfg.system, s).items():
                write_field(snap / f"{name}_{step:06d}.evf1", g, f, label=f"{name} t={d['t']!r}")
    term = tr.termination
    _dump(out / "run.json", {
        "system": cfg.system,
        "grid": g.ident,
        "params": p.to_dict(),
        "initial_norms": init.summary(),
        "termination": {"kind": term.kind, "t": term.t, "step": term.step, "detail": term.detail},
        "max_cfl": tr.max_cfl,
    })
    if cfg.diagnostics["plots"]:
        from .plotting import plot_diagnostics

        plot_diagnostics(rows, out / "diagnostics.png", title=f"{cfg.system} on {g.ident}")
    print(f"simulate: {term.kind} at t={term.t:.6g}; max h-heat deviation "
          f"{max(r['h_heat_error'] for r in rows):.3e}; max CFL {tr.max_cfl:.3g}")
    return EXIT_OK if term.kind == "completed" else EXIT_TERMINATED


def cmd_besov(cfg, out, input_path=None):
    path = input_path or cfg.besov.get("input")
    if path:
        g, f, label = read_field(path)
        source = {"input": str(path), "label": label}
    else:
        g, p = cfg.make_grid(), cfg.make_params()
        init = generate_initial(cfg.initial, g, p)
        f = init.momentum.q
        source = {"input": None, "label": "q0 from the initial-data block"}
    reports = [besov_norm(g, f, spec).to_dict() for spec in cfg.besov_specs()]
    _dump(out / "besov.json", {"source": source, "reports": reports})
    for r in reports:
        s = r["spec"]
        print(f"besov: B^{s['s']}_{{{s['p']},{s['r']}}} = {r['aggregate']:.10g}")
    return EXIT_OK


def _picard_stepper(cfg):
    dt = cfg.stepper["dt"]
    return StepperConfig(dt=dt, T=cfg.picard_T(), scheme=cfg.stepper["scheme"])


def cmd_picard(cfg, out):
    g, p = cfg.make_grid(), cfg.make_params()
    init = generate_initial(cfg.initial, g, p)
    pc = cfg.picard
    res = run_picard(g, init.momentum.q, init.momentum.m, p, _picard_stepper(cfg), tol=pc["tol"],
                     max_iter=pc["max_iter"], compare_evolve=pc["compare_evolve"],
                     evolve_refine=pc["evolve_refine"])
    t = res.trace
    _dump(out / "picard_trace.json", {"initial_norms": init.summary(), "trace": t.to_dict()})
    _write_csv(out / "picard_iterates.csv", ["iteration", "iterate_norm", "delta", "ratio", "min_h"],
               [[i + 1, t.iterate_norms[i], t.deltas[i], (t.ratios[i - 1] if i > 0 else ""), t.min_h[i]]
                for i in range(len(t.deltas))])
    if cfg.diagnostics["plots"]:
        from .plotting import plot_contraction

        plot_contraction(t, out / "contraction.png")
    print(f"picard: {t.outcome} after {t.iterations} iterations; max ratio {t.max_ratio:.3g}; "
          f"residual vs evolve {t.residual_vs_evolve}")
    return EXIT_TERMINATED if t.outcome in ("vacuum", "diverged") else EXIT_OK


def cmd_sweep(cfg, out):
    g, p = cfg.make_grid(), cfg.make_params()
    sw = cfg.sweep
    k = cfg.initial.get("k", [1] + [0] * (g.dim - 1))
    if isinstance(k, int):
        k = [k] + [0] * (g.dim - 1)
    rng = np.random.default_rng(cfg.seed)
    if sw["direction"]:
        direction = momentum_field(g, sw["direction"], rng)
    else:
        direction = np.zeros((g.dim, *g.shape))
        direction[0] = cosine_mode(g, k)
    results = []
    for A in sw["families"]:
        q0 = cosine_mode(g, k, A)
        results.append(threshold_sweep(g, q0, direction, cfg.sweep_amplitudes(), p, _picard_stepper(cfg),
                                       tol=cfg.picard["tol"], max_iter=cfg.picard["max_iter"],
                                       label=f"A={A!r}", workers=sw["workers"]))
    pairs, trend = family_trend(results)
    rows = []
    for res in results:
        for r in res.rows:
            rows.append([res.label, r.amplitude, r.outcome, r.iterations, r.max_ratio, r.final_norm, r.min_h])
    _write_csv(out / "sweep.csv", ["family", "amplitude", "outcome", "iterations", "max_ratio", "final_norm",
                                   "min_h"], rows)
    _dump(out / "sweep_trace.json", {
        "families": [r.to_dict() for r in results],
        "trend": {"pairs": pairs, "decreasing": trend},
    })
    if cfg.diagnostics["plots"]:
        from .plotting import plot_sweep

        plot_sweep(results, out / "sweep.png")
    for r in results:
        print(f"sweep: {r.label} min h0={r.min_h0:.3g} |q0|={r.q0_norm:.4g} bracket={r.bracket}"
              + (f" monotonicity violations at {r.violations}" if r.violations else ""))
    print(f"sweep: threshold decreasing with 1/min h0: {trend}")
    return EXIT_OK


def cmd_verify(cfg, out, quick=False):
    names = cfg.verify.get("checks")
    unknown = [n for n in names or [] if n not in REGISTRY]
    if unknown:
        raise ConfigError([f"verify.checks: unknown check {n!r}" for n in unknown])
    reports = run_checks(names, seed=cfg.seed, quick=quick or cfg.verify.get("quick", False))
    for rep in reports:
        (out / f"check_{rep.name}.json").write_text(rep.to_json(indent=2) + "\n")
    _write_csv(out / "verify_summary.csv", ["check", "verdict", "samples", "claims"],
               [[r.name, r.verdict, r.samples, " ".join(r.claims)] for r in reports])
    width = max(len(r.name) for r in reports)
    for r in reports:
        print(f"{r.name:<{width}}  {r.verdict.upper()}")
    ok = all(r.passed for r in reports)
    print(f"verify: {sum(r.passed for r in reports)}/{len(reports)} checks passed")
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "simulate": cmd_simulate,
    "besov": cmd_besov,
    "picard": cmd_picard,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="shallowlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON run configuration (defaults if omitted)")
        sp.add_argument("--out", type=Path, help="output directory (overrides diagnostics.output_dir)")
        sp.add_argument("--seed", type=int, help="override the initial-data seed")
        if name == "besov":
            sp.add_argument("--input", type=Path, help="EVF1 field file (overrides besov.input)")
        if name == "verify":
            sp.add_argument("--quick", action="store_true", help="reduced sample counts")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args.config) if args.config else default_config()
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError([f"--seed must be nonnegative, got {args.seed}"])
            cfg = cfg.with_seed(args.seed)
        if args.out is not None:
            cfg = cfg.with_output(args.out)
        out = Path(cfg.diagnostics["output_dir"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(cfg.to_json() + "\n")
        kw = {}
        if args.command == "besov" and args.input is not None:
            kw["input_path"] = args.input
        if args.command == "verify":
            kw["quick"] = args.quick
        code = COMMANDS[args.command](cfg, out, **kw)
        write_manifest(out, args.command, cfg, {"exit_code": code})
        return code
    except ConfigError as exc:
        print("configuration error:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return EXIT_CONFIG
    except VacuumBreach as exc:
        print(f"terminated: {exc}", file=sys.stderr)
        return EXIT_TERMINATED
    except ShallowLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
