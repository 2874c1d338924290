import math

import pytest
import yaml

from sensormgr.config import (
    ScenarioConfig,
    TargetSpec,
    bundled_scenario_path,
    bundled_scenarios,
    config_from_mapping,
    load_bundled,
    parse_scenario,
    validate,
)
from sensormgr.errors import ParseError, ValidationError

MINIMAL = """\
name: tiny
dt: 0.05
duration: 1.0
targets:
  - {position: [0, 0, 0]}
  - {position: [300, 0, 0], velocity: [1, 0, 0]}
weights: [1, 1]
"""


def write(tmp_path, text, name="s.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_bundled_scenarios_present():
    assert bundled_scenarios() == ["scenario_5_1", "scenario_5_2", "scenario_5_3"]


def test_bundled_5_1_parameters():
    cfg = load_bundled("scenario_5_1")
    assert cfg.manager.s1_threshold == 4.0
    assert cfg.manager.v_max_targets == 4
    assert cfg.manager.n_max_sensors == 5
    assert cfg.coverage.h_min == 500.0
    assert (cfg.meas_noise.sigma_az, cfg.meas_noise.sigma_el, cfg.meas_noise.sigma_r) == (0.007, 0.007, 0.05)
    assert cfg.dynamics.sigma == (0.1, 0.1, 0.1)
    assert cfg.n_targets == 10
    assert cfg.guidance_mode == "none"
    assert cfg.coverage.theta_x == pytest.approx(math.radians(60))


def test_minimal_file_takes_defaults(tmp_path):
    cfg = parse_scenario(write(tmp_path, MINIMAL))
    assert cfg.name == "tiny"
    assert cfg.n_steps == 20
    assert cfg.targets[1] == TargetSpec((300.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    assert cfg.coverage.h_max == 2000.0
    assert cfg.fw.max_iters == 500
    assert cfg.sensors == ()


def test_duration_not_multiple_of_dt(tmp_path):
    with pytest.raises(ValidationError) as info:
        parse_scenario(write(tmp_path, MINIMAL.replace("duration: 1.0", "duration: 1.03")))
    assert any("multiple of dt" in p for p in info.value.problems)


def test_unknown_key_names_key_and_line(tmp_path):
    text = MINIMAL + "coverage:\n  h_min: 400\n  h_maxx: 900\n"
    with pytest.raises(ParseError) as info:
        parse_scenario(write(tmp_path, text))
    msg = str(info.value)
    assert "coverage.h_maxx" in msg and "line 10" in msg
    with pytest.raises(ParseError, match="speeed"):
        parse_scenario(write(tmp_path, MINIMAL + "speeed: 3\n"))


def test_validation_lists_every_problem(tmp_path):
    text = MINIMAL.replace("weights: [1, 1]", "weights: [1]") + "guidance_mode: fast\n"
    with pytest.raises(ValidationError) as info:
        parse_scenario(write(tmp_path, text))
    assert len(info.value.problems) >= 2


def test_sensor_rows_checked():
    doc = yaml.safe_load(MINIMAL)
    doc["sensors"] = [{"assignment": [1, 1, 1]}]
    with pytest.raises(ValidationError):
        config_from_mapping(doc)
    doc["sensors"] = [{"assignment": [0, 0]}]
    with pytest.raises(ValidationError):
        config_from_mapping(doc)
    doc["sensors"] = [{"assignment": [1, 0], "position": "random"}, {"assignment": [0, 1], "position": [0, 0, 800]}]
    cfg = config_from_mapping(doc)
    assert cfg.sensors[0].position is None and cfg.sensors[1].position == (0.0, 0.0, 800.0)


def test_malformed_yaml(tmp_path):
    with pytest.raises(ParseError, match="line"):
        parse_scenario(write(tmp_path, "targets: [\n  - {position: [0,0,0]\n"))


def test_mapping_and_file_agree():
    path = bundled_scenario_path("scenario_5_3")
    from_file = parse_scenario(path)
    from_doc = config_from_mapping(yaml.safe_load(path.read_text()), source=str(path))
    assert from_file == from_doc


def test_mode_aliases():
    cfg = load_bundled("scenario_5_1")
    assert cfg.with_mode("cgd").guidance_mode == "conditional_gradient"
    assert cfg.with_mode("optimal").guidance_mode == "optimal"
    with pytest.raises(ValidationError):
        validate(ScenarioConfig(targets=(TargetSpec((0, 0, 0)),), weights=(1.0,), guidance_mode="fast"))
