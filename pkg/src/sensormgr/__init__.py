"""Multisensor management for airborne tracking of ground targets.

Targets are tracked with a sequential extended Kalman filter; tracking
quality is scored with Fisher-information D-optimality; a fusion center
decides when and where to deploy new sensors and steers deployed sensors
with Frank-Wolfe (conditional gradient) steps inside polyhedral coverage
regions.
"""

from .config import ScenarioConfig, SensorSpec, TargetSpec, load_bundled, parse_scenario
from .errors import (
    ConfigInvalid,
    DegenerateGeometry,
    EmptyRegion,
    InnovationGateExceeded,
    NoFeasibleCandidate,
    ParseError,
    RankDeficient,
    SensorMgrError,
    SimulationError,
    SingularMatrix,
    ValidationError,
)
from .sim import StepRecord, TraceLog, run_scenario

__version__ = "0.1.0"

__all__ = [
    "ScenarioConfig",
    "SensorSpec",
    "TargetSpec",
    "load_bundled",
    "parse_scenario",
    "run_scenario",
    "StepRecord",
    "TraceLog",
    "SensorMgrError",
    "SingularMatrix",
    "RankDeficient",
    "DegenerateGeometry",
    "EmptyRegion",
    "NoFeasibleCandidate",
    "InnovationGateExceeded",
    "ParseError",
    "ValidationError",
    "ConfigInvalid",
    "SimulationError",
]
