"""Scenario description and its YAML front end.

A scenario file is a YAML mapping; see ``docs/scenario_schema.md`` for
the full key list. Omitted keys take the defaults below, unknown keys are
rejected.
"""

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .dynamics import DEFAULT_LAG_TAU, DEFAULT_SENSOR_VMAX, DynamicsModel
from .errors import ParseError, ValidationError
from .estimation import DEFAULT_P0
from .manager import ManagerConfig
from .optimize import FwConfig
from .sensing import Coverage, MeasurementNoise

GUIDANCE_MODES = ("none", "optimal", "conditional_gradient")
MODE_ALIASES = {"cgd": "conditional_gradient"}


@dataclass(frozen=True)
class TargetSpec:
    position: tuple
    velocity: tuple = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SensorSpec:
    """``position=None`` draws a random feasible start for the group."""

    assignment: tuple
    position: tuple = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    dt: float = 0.05
    duration: float = 10.0
    seed: int = 0
    guidance_mode: str = "none"
    targets: tuple = ()
    target_speed_range: tuple = None
    sensors: tuple = ()
    weights: tuple = ()
    coverage: Coverage = field(default_factory=Coverage)
    dynamics: DynamicsModel = field(default_factory=DynamicsModel)
    truth_process_noise: bool = False
    meas_noise: MeasurementNoise = field(default_factory=MeasurementNoise)
    manager: ManagerConfig = field(default_factory=ManagerConfig)
    deploy: bool = True
    fw: FwConfig = field(default_factory=FwConfig)
    lag_tau: float = DEFAULT_LAG_TAU
    sensor_v_max: float = DEFAULT_SENSOR_VMAX
    p0_diag: tuple = DEFAULT_P0
    gate: float = math.inf

    @property
    def n_steps(self):
        return int(round(self.duration / self.dt))

    @property
    def n_targets(self):
        return len(self.targets)

    def with_mode(self, mode):
        return replace(self, guidance_mode=MODE_ALIASES.get(mode, mode))


def validation_problems(cfg):
    problems = []
    if not cfg.dt > 0:
        problems.append("dt must be positive")
    if cfg.duration < 0:
        problems.append("duration must be non-negative")
    elif cfg.dt > 0:
        k = cfg.duration / cfg.dt
        if abs(k - round(k)) > 1e-9 * max(1.0, k):
            problems.append(f"duration {cfg.duration} is not a multiple of dt {cfg.dt}")
    if not cfg.dynamics.dt == cfg.dt:
        problems.append("dynamics.dt must equal dt")
    if cfg.guidance_mode not in GUIDANCE_MODES:
        problems.append(f"guidance_mode must be one of {GUIDANCE_MODES}")
    L = len(cfg.targets)
    if L == 0:
        problems.append("at least one target is required")
    if len(cfg.weights) != L:
        problems.append(f"weights has {len(cfg.weights)} entries for {L} targets")
    elif any(w < 0 for w in cfg.weights) or not any(w > 0 for w in cfg.weights):
        problems.append("weights must be non-negative with at least one positive entry")
    if len(cfg.sensors) > cfg.manager.n_max_sensors:
        problems.append("more initial sensors than n_max_sensors")
    for i, s in enumerate(cfg.sensors):
        if len(s.assignment) != L:
            problems.append(f"sensors[{i}].assignment must have {L} entries")
        elif sum(bool(a) for a in s.assignment) > cfg.manager.v_max_targets:
            problems.append(f"sensors[{i}] tracks more than v_max_targets targets")
        elif not any(s.assignment):
            problems.append(f"sensors[{i}] tracks no target")
    if cfg.target_speed_range is not None:
        lo, hi = cfg.target_speed_range
        if not 0 <= lo <= hi:
            problems.append("target_speed_range must satisfy 0 <= lo <= hi")
    if len(cfg.p0_diag) != 6 or min(cfg.p0_diag) <= 0:
        problems.append("p0_diag must hold six positive values")
    if cfg.lag_tau <= 0 or cfg.sensor_v_max <= 0:
        problems.append("sensor lag_tau and v_max must be positive")
    return problems


def validate(cfg):
    problems = validation_problems(cfg)
    if problems:
        raise ValidationError(problems)
    return cfg


# --- YAML front end -------------------------------------------------------

_SECTIONS = {
    "dynamics": {"sigma", "truth_process_noise"},
    "measurement_noise": {"sigma_az", "sigma_el", "sigma_r"},
    "coverage": {"theta_x_deg", "theta_y_deg", "h_min", "h_max", "xy_bound"},
    "sensor_model": {"lag_tau", "v_max"},
    "manager": {"s1_threshold", "v_max_targets", "n_max_sensors", "deploy_spacing",
                "predict_horizon", "deploy"},
    "frank_wolfe": {"step_rule", "alpha_fixed", "gap_tol", "max_iters"},
    "estimation": {"p0_diag", "gate"},
}
_TOP = {"name", "dt", "duration", "seed", "guidance_mode", "weights", "targets",
        "target_speed_range", "sensors"} | set(_SECTIONS)
_TARGET_KEYS = {"position", "velocity"}
_SENSOR_KEYS = {"position", "assignment"}


def _key_lines(node, prefix=()):
    lines = {}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = prefix + (k.value,)
            lines[path] = k.start_mark.line + 1
            lines.update(_key_lines(v, path))
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            lines.update(_key_lines(v, prefix + (i,)))
    return lines


def _check_keys(mapping, allowed, path, lines, where):
    if not isinstance(mapping, dict):
        raise ParseError(f"{where or 'document'}: expected a mapping")
    for key in mapping:
        if key not in allowed:
            line = lines.get(path + (key,))
            at = f"line {line}: " if line else ""
            raise ParseError(f"{at}unknown key {'.'.join(map(str, path + (key,)))!r}")


def _vec(value, n, what):
    try:
        arr = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ValidationError(f"{what} must be a list of {n} numbers") from None
    if len(arr) != n:
        raise ValidationError(f"{what} must have {n} entries")
    return arr


def config_from_mapping(doc, lines=None, source="<mapping>"):
    lines = lines or {}
    _check_keys(doc, _TOP, (), lines, source)
    for sec, keys in _SECTIONS.items():
        if sec in doc:
            _check_keys(doc[sec], keys, (sec,), lines, sec)
    problems = []

    def build(thunk, label):
        try:
            return thunk()
        except ValidationError as exc:
            problems.extend(exc.problems)
        except (TypeError, ValueError) as exc:
            problems.append(f"{label}: {exc}")
        return None

    targets = []
    for i, t in enumerate(doc.get("targets") or []):
        _check_keys(t, _TARGET_KEYS, ("targets", i), lines, f"targets[{i}]")
        spec = build(lambda t=t, i=i: TargetSpec(
            _vec(t.get("position"), 3, f"targets[{i}].position"),
            _vec(t.get("velocity", (0, 0, 0)), 3, f"targets[{i}].velocity")), f"targets[{i}]")
        if spec:
            targets.append(spec)
    sensors = []
    for i, s in enumerate(doc.get("sensors") or []):
        _check_keys(s, _SENSOR_KEYS, ("sensors", i), lines, f"sensors[{i}]")
        pos = s.get("position", "random")
        if pos == "random":
            pos = None
        else:
            pos = build(lambda pos=pos, i=i: _vec(pos, 3, f"sensors[{i}].position"),
                        f"sensors[{i}]")
        row = tuple(bool(a) for a in s.get("assignment", ()))
        sensors.append(SensorSpec(row, pos))

    dt = float(doc.get("dt", 0.05))
    dyn = doc.get("dynamics", {})
    meas = doc.get("measurement_noise", {})
    cov = doc.get("coverage", {})
    smod = doc.get("sensor_model", {})
    man = dict(doc.get("manager", {}))
    deploy = bool(man.pop("deploy", True))
    fw = doc.get("frank_wolfe", {})
    est = doc.get("estimation", {})

    dynamics = build(lambda: DynamicsModel(dt, tuple(dyn.get("sigma", (0.1, 0.1, 0.1)))), "dynamics")
    noise = build(lambda: MeasurementNoise(**meas), "measurement_noise")
    coverage = build(lambda: Coverage(
        theta_x=math.radians(cov.get("theta_x_deg", 60.0)),
        theta_y=math.radians(cov.get("theta_y_deg", 60.0)),
        h_min=float(cov.get("h_min", 500.0)),
        h_max=float(cov.get("h_max", 2000.0)),
        xy_bound=float(cov.get("xy_bound", 10_000.0))), "coverage")
    manager = build(lambda: ManagerConfig(**man), "manager")
    fwc = build(lambda: FwConfig(**fw), "frank_wolfe")
    speed = doc.get("target_speed_range")
    if speed is not None:
        speed = build(lambda: _vec(speed, 2, "target_speed_range"), "target_speed_range")
    p0 = build(lambda: _vec(est.get("p0_diag", DEFAULT_P0), 6, "estimation.p0_diag"), "estimation")
    if problems:
        raise ValidationError(problems)

    cfg = ScenarioConfig(
        name=str(doc.get("name", Path(source).stem)),
        dt=dt,
        duration=float(doc.get("duration", 10.0)),
        seed=int(doc.get("seed", 0)),
        guidance_mode=MODE_ALIASES.get(doc.get("guidance_mode", "none"),
                                       doc.get("guidance_mode", "none")),
        targets=tuple(targets),
        target_speed_range=speed,
        sensors=tuple(sensors),
        weights=tuple(float(w) for w in doc.get("weights", [1.0] * len(targets))),
        coverage=coverage,
        dynamics=dynamics,
        truth_process_noise=bool(dyn.get("truth_process_noise", False)),
        meas_noise=noise,
        manager=manager,
        deploy=deploy,
        fw=fwc,
        lag_tau=float(smod.get("lag_tau", DEFAULT_LAG_TAU)),
        sensor_v_max=float(smod.get("v_max", DEFAULT_SENSOR_VMAX)),
        p0_diag=p0,
        gate=float(est.get("gate", math.inf)),
    )
    return validate(cfg)


def parse_scenario(path):
    path = Path(path)
    text = path.read_text()
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        line = f"line {mark.line + 1}: " if mark else ""
        raise ParseError(f"{path}: {line}{exc.problem}") from None
    if doc is None:
        doc = {}
    return config_from_mapping(doc, _key_lines(node) if node else {}, str(path))


def bundled_scenarios():
    root = resources.files("sensormgr") / "scenarios"
    return sorted(p.name.removesuffix(".yaml") for p in root.iterdir() if p.name.endswith(".yaml"))


def bundled_scenario_path(name):
    path = resources.files("sensormgr") / "scenarios" / f"{name}.yaml"
    if not path.is_file():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return Path(str(path))


def load_bundled(name):
    return parse_scenario(bundled_scenario_path(name))


def initial_targets(cfg, rng):
    """Target truth at t=0; speeds are drawn when a speed range is set."""
    out = []
    for t in cfg.targets:
        v = np.array(t.velocity, dtype=float)
        if cfg.target_speed_range is not None:
            lo, hi = cfg.target_speed_range
            speed = rng.uniform(lo, hi)
            heading = rng.uniform(-np.pi, np.pi)
            v = np.array([speed * np.sin(heading), speed * np.cos(heading), 0.0])
        out.append((np.array(t.position, dtype=float), v))
    return out
