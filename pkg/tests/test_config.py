import json
import math

import pytest

from shallowlab.config import default_config, parse_config, parse_dict
from shallowlab.errors import ConfigError


def test_defaults():
    cfg = default_config()
    assert cfg.grid == {"dim": 1, "n": 256, "L": 2 * math.pi}
    assert cfg.params["viscosity_form"] == "strain"
    assert cfg.system == "primitive"
    assert cfg.make_params().kappa == pytest.approx(0.01)
    assert cfg.picard_T() == 1.0


def test_minimal_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"grid": {"dim": 2, "n": 32}, "params": {"mu": 0.2}}))
    cfg = parse_config(path)
    assert cfg.make_grid().n == (32, 32)
    assert cfg.make_params().mu == 0.2


def test_roundtrip():
    doc = {
        "grid": {"dim": 2, "n": [16, 32], "L": [1.0, 2.0]},
        "params": {"mu": 0.05, "r": 2.0},
        "initial": {"generator": "random_band", "seed": 3, "amplitude": 0.2},
        "stepper": {"dt": 0.02, "T": 0.5},
        "diagnostics": {"besov": [{"field": "h", "s": 1, "p": 2, "r": 1}]},
        "system": "momentum",
    }
    cfg = parse_dict(doc)
    again = parse_dict(json.loads(cfg.to_json()))
    assert again == cfg
    assert again.besov_tracks()[0][0] == "h"


def test_contradicting_kappa_names_constraint():
    with pytest.raises(ConfigError) as err:
        parse_dict({"params": {"mu": 0.1, "kappa": 0.5}})
    assert any("kappa = mu^2" in v for v in err.value.violations)


def test_collects_all_violations():
    doc = {
        "bogus": 1,
        "grid": {"dim": 5, "n": 12},
        "params": {"mu": "fast"},
        "stepper": {"scheme": "RK4", "extra": True},
        "initial": {"generator": "large_gradient", "A": 1.2},
        "system": "euler",
    }
    with pytest.raises(ConfigError) as err:
        parse_dict(doc)
    msgs = err.value.violations
    for needle in ("bogus", "grid.dim", "params.mu", "stepper.scheme", "stepper.extra", "initial.A", "system"):
        assert any(needle in m for m in msgs), needle


def test_momentum_needs_constraint():
    doc = {"system": "momentum", "params": {"constrained": False, "kappa": 0.0, "fr": 1.0}}
    with pytest.raises(ConfigError, match="constrained"):
        parse_dict(doc)


@pytest.mark.parametrize(
    "initial",
    [
        {"generator": "spiral"},
        {"generator": "zero", "seed": -1},
        {"generator": "zero", "A": 0.5},
        {"generator": "random_band", "amplitude": 1.5},
    ],
)
def test_bad_initial(initial):
    with pytest.raises(ConfigError):
        parse_dict({"initial": initial})


def test_bad_besov_spec():
    with pytest.raises(ConfigError):
        parse_dict({"diagnostics": {"besov": [{"field": "z", "s": 1}]}})
    with pytest.raises(ConfigError):
        parse_dict({"besov": {"specs": [{"s": 1, "p": 0.5}]}})


def test_infinite_indices():
    cfg = parse_dict({"besov": {"specs": [{"s": 0.5, "p": "inf", "r": "inf"}]}})
    spec = cfg.besov_specs()[0]
    assert math.isinf(spec.p) and math.isinf(spec.r)


def test_seed_and_output_overrides(tmp_path):
    cfg = default_config().with_seed(9).with_output(tmp_path)
    assert cfg.seed == 9
    assert cfg.diagnostics["output_dir"] == str(tmp_path)


def test_sweep_amplitudes():
    cfg = parse_dict({"sweep": {"start": 0.1, "factor": 2.0, "count": 4}})
    assert cfg.sweep_amplitudes() == [0.1, 0.2, 0.4, 0.8]
    cfg = parse_dict({"sweep": {"amplitudes": [0.5, 1]}})
    assert cfg.sweep_amplitudes() == [0.5, 1.0]
    with pytest.raises(ConfigError):
        parse_dict({"sweep": {"factor": 1.0}})


def test_missing_and_invalid_files(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "none.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config(bad)
