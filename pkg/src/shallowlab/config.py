"""Run configuration: a single JSON document with one block per concern.

Parsing collects every violation (unknown keys, bad types, coefficient
conflicts) before raising a single :class:`ConfigError`. ``to_dict`` emits
the fully defaulted document, and ``parse_dict(cfg.to_dict())`` reproduces
``cfg``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .grid import Grid
from .initial import GENERATORS
from .littlewood_paley import BesovSpec
from .models import VISCOSITY_FORMS, Params
from .propagators import SCHEMES, StepperConfig

SYSTEMS = ("primitive", "momentum")
BESOV_FIELDS = ("h", "q", "u", "m")

_NUM = (int, float)


def _is_num(v):
    return isinstance(v, _NUM) and not isinstance(v, bool)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _num_or_inf(v):
    return _is_num(v) or v in ("inf", "Infinity")


def _to_float(v):
    return math.inf if v in ("inf", "Infinity") else float(v)


# Each schema entry: key -> (default, predicate, description of the expected value)
GRID_SCHEMA = {
    "dim": (1, lambda v: v in (1, 2, 3) and _is_int(v), "1, 2 or 3"),
    "n": (256, lambda v: _is_int(v) or (isinstance(v, list) and all(_is_int(x) for x in v)), "int or list of int"),
    "L": (2 * math.pi, lambda v: _is_num(v) or (isinstance(v, list) and all(_is_num(x) for x in v)), "number or list"),
}
PARAMS_SCHEMA = {
    "mu": (0.1, _is_num, "number"),
    "r": (1.0, _is_num, "number"),
    "kappa": (None, lambda v: v is None or _is_num(v), "number or null"),
    "fr": (None, lambda v: v is None or _num_or_inf(v), "number, 'inf' or null"),
    "constrained": (True, lambda v: isinstance(v, bool), "boolean"),
    "viscosity_form": ("strain", lambda v: v in VISCOSITY_FORMS, f"one of {VISCOSITY_FORMS}"),
    "floor": (1e-3, _is_num, "number"),
}
STEPPER_SCHEMA = {
    "dt": (0.01, _is_num, "number"),
    "T": (1.0, _is_num, "number"),
    "scheme": ("ETDRK2", lambda v: v in SCHEMES, f"one of {SCHEMES}"),
    "output_stride": (10, lambda v: _is_int(v) and v >= 1, "integer >= 1"),
}
DIAG_SCHEMA = {
    "besov": ([], lambda v: isinstance(v, list), "list of {field, s, p, r}"),
    "output_dir": ("shallowlab_out", lambda v: isinstance(v, str), "string"),
    "snapshots": (True, lambda v: isinstance(v, bool), "boolean"),
    "plots": (True, lambda v: isinstance(v, bool), "boolean"),
}
PICARD_SCHEMA = {
    "tol": (1e-10, _is_num, "number"),
    "max_iter": (30, lambda v: _is_int(v) and v >= 1, "integer >= 1"),
    "T": (None, lambda v: v is None or _is_num(v), "number or null (min(1, 3/r))"),
    "compare_evolve": (True, lambda v: isinstance(v, bool), "boolean"),
    "evolve_refine": (4, lambda v: _is_int(v) and v >= 1, "integer >= 1"),
}
SWEEP_SCHEMA = {
    "amplitudes": (None, lambda v: v is None or (isinstance(v, list) and all(_is_num(x) for x in v)), "list of numbers"),
    "start": (0.02, _is_num, "number"),
    "factor": (math.sqrt(2.0), _is_num, "number > 1"),
    "count": (16, lambda v: _is_int(v) and v >= 1, "integer >= 1"),
    "direction": (None, lambda v: v is None or isinstance(v, dict), "momentum sub-spec"),
    "families": ([0.3, 0.6, 0.9], lambda v: isinstance(v, list) and all(_is_num(x) for x in v), "list of A values"),
    "workers": (1, lambda v: _is_int(v) and v >= 1, "integer >= 1"),
}
VERIFY_SCHEMA = {
    "checks": (None, lambda v: v is None or (isinstance(v, list) and all(isinstance(x, str) for x in v)), "list of check names"),
    "quick": (False, lambda v: isinstance(v, bool), "boolean"),
}
BESOV_SCHEMA = {
    "input": (None, lambda v: v is None or isinstance(v, str), "path to an EVF1 file"),
    "specs": ([{"s": 0.5, "p": 2, "r": 1}], lambda v: isinstance(v, list), "list of {s, p, r}"),
}
INITIAL_KEYS = {
    "zero": set(),
    "modes": {"modes"},
    "random_band": {"k_min", "k_max", "amplitude", "m_amplitude"},
    "large_gradient": {"A", "k", "momentum"},
}
TOP_KEYS = {"grid", "params", "initial", "stepper", "diagnostics", "system", "picard", "sweep", "verify", "besov"}


def _block(d, schema, where, errs):
    out = {}
    if d is None:
        d = {}
    if not isinstance(d, dict):
        errs.append(f"{where}: expected an object")
        d = {}
    for key in d:
        if key not in schema:
            errs.append(f"{where}.{key}: unknown key")
    for key, (default, ok, desc) in schema.items():
        val = d.get(key, copy.deepcopy(default))
        if key in d and not ok(val):
            errs.append(f"{where}.{key}: expected {desc}, got {val!r}")
            val = copy.deepcopy(default)
        out[key] = val
    return out


def _spec_list(items, where, errs, with_field):
    specs = []
    for i, it in enumerate(items):
        if not isinstance(it, dict):
            errs.append(f"{where}[{i}]: expected an object")
            continue
        allowed = {"s", "p", "r"} | ({"field"} if with_field else set())
        for k in it:
            if k not in allowed:
                errs.append(f"{where}[{i}].{k}: unknown key")
        if with_field and it.get("field") not in BESOV_FIELDS:
            errs.append(f"{where}[{i}].field: expected one of {BESOV_FIELDS}")
        try:
            spec = BesovSpec(float(it.get("s", 0.0)), _to_float(it.get("p", 2)), _to_float(it.get("r", 1)))
        except (TypeError, ValueError) as exc:
            errs.append(f"{where}[{i}]: {exc}")
            continue
        specs.append((it.get("field"), spec) if with_field else spec)
    return specs


def _check_initial(d, errs):
    if not isinstance(d, dict):
        errs.append("initial: expected an object")
        return {"generator": "zero", "seed": 0}
    d = copy.deepcopy(d)
    gen = d.setdefault("generator", "zero")
    seed = d.setdefault("seed", 0)
    if gen not in GENERATORS:
        errs.append(f"initial.generator: expected one of {GENERATORS}, got {gen!r}")
        return d
    if not (_is_int(seed) and seed >= 0):
        errs.append(f"initial.seed: expected a nonnegative integer, got {seed!r}")
    for key in d:
        if key not in INITIAL_KEYS[gen] | {"generator", "seed"}:
            errs.append(f"initial.{key}: unknown key for generator {gen!r}")
    if gen == "large_gradient":
        A = d.get("A", 0.9)
        if not (_is_num(A) and 0 <= A < 1):
            errs.append(f"initial.A: expected 0 <= A < 1 so that min h0 = 1 - A > 0, got {A!r}")
    if gen == "random_band":
        amp = d.get("amplitude", 0.1)
        if not (_is_num(amp) and 0 <= amp < 1):
            errs.append(f"initial.amplitude: expected 0 <= amplitude < 1, got {amp!r}")
    return d


@dataclass
class RunConfig:
    grid: dict
    params: dict
    initial: dict
    stepper: dict
    diagnostics: dict
    system: str = "primitive"
    picard: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    besov: dict = field(default_factory=dict)

    # -- derived objects ----------------------------------------------------
    def make_grid(self):
        return Grid(self.grid["dim"], self.grid["n"], self.grid["L"])

    def make_params(self):
        d = dict(self.params)
        if d.get("fr") is not None:
            d["fr"] = _to_float(d["fr"])
        return Params(**d)

    def make_stepper(self):
        return StepperConfig(**self.stepper)

    def besov_tracks(self):
        return _spec_list(self.diagnostics["besov"], "diagnostics.besov", [], True)

    def besov_specs(self):
        return _spec_list(self.besov["specs"], "besov.specs", [], False)

    @property
    def seed(self):
        return self.initial.get("seed", 0)

    def with_seed(self, seed):
        d = self.to_dict()
        d["initial"]["seed"] = int(seed)
        return parse_dict(d)

    def with_output(self, out):
        d = self.to_dict()
        d["diagnostics"]["output_dir"] = str(out)
        return parse_dict(d)

    def picard_T(self):
        T = self.picard.get("T")
        if T is not None:
            return float(T)
        r = self.params["r"]
        return 1.0 if r <= 0 else min(1.0, 3.0 / r)

    def sweep_amplitudes(self):
        s = self.sweep
        if s.get("amplitudes") is not None:
            return [float(a) for a in s["amplitudes"]]
        return [s["start"] * s["factor"] ** j for j in range(s["count"])]

    def to_dict(self):
        return copy.deepcopy(
            {
                "grid": self.grid,
                "params": self.params,
                "initial": self.initial,
                "stepper": self.stepper,
                "diagnostics": self.diagnostics,
                "system": self.system,
                "picard": self.picard,
                "sweep": self.sweep,
                "verify": self.verify,
                "besov": self.besov,
            }
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def parse_dict(d):
    """Validate a config document and fill defaults."""
    errs = []
    if not isinstance(d, dict):
        raise ConfigError(["config: expected a JSON object at top level"])
    for key in d:
        if key not in TOP_KEYS:
            errs.append(f"{key}: unknown key")
    grid = _block(d.get("grid"), GRID_SCHEMA, "grid", errs)
    params = _block(d.get("params"), PARAMS_SCHEMA, "params", errs)
    stepper = _block(d.get("stepper"), STEPPER_SCHEMA, "stepper", errs)
    diag = _block(d.get("diagnostics"), DIAG_SCHEMA, "diagnostics", errs)
    picard = _block(d.get("picard"), PICARD_SCHEMA, "picard", errs)
    sweep = _block(d.get("sweep"), SWEEP_SCHEMA, "sweep", errs)
    verify = _block(d.get("verify"), VERIFY_SCHEMA, "verify", errs)
    besov = _block(d.get("besov"), BESOV_SCHEMA, "besov", errs)
    initial = _check_initial(d.get("initial", {}), errs)
    system = d.get("system", "primitive")
    if system not in SYSTEMS:
        errs.append(f"system: expected one of {SYSTEMS}, got {system!r}")
        system = "primitive"
    _spec_list(diag["besov"], "diagnostics.besov", errs, True)
    _spec_list(besov["specs"], "besov.specs", errs, False)
    if sweep["factor"] <= 1:
        errs.append("sweep.factor: expected a number > 1")
    cfg = RunConfig(grid, params, initial, stepper, diag, system, picard, sweep, verify, besov)
    for build, where in ((cfg.make_grid, "grid"), (cfg.make_params, "params"), (cfg.make_stepper, "stepper")):
        try:
            build()
        except ConfigError as exc:
            errs.extend(f"{where}: {v}" for v in exc.violations)
        except (TypeError, ValueError) as exc:
            errs.append(f"{where}: {exc}")
    if system == "momentum" and not params["constrained"]:
        errs.append("system: the momentum system needs params.constrained = true")
    if errs:
        raise ConfigError(errs)
    return cfg


def parse_config(path):
    """Read and validate a JSON config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"{path}: file not found"])
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: invalid JSON ({exc})"]) from exc
    return parse_dict(d)


def default_config():
    return parse_dict({})
