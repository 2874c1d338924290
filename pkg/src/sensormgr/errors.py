"""Exception hierarchy shared across the package."""


class SensorMgrError(Exception):
    """Base class for all package errors."""


class SingularMatrix(SensorMgrError):
    pass


class RankDeficient(SensorMgrError):
    pass


class DegenerateGeometry(SensorMgrError):
    """Sensor is (numerically) directly above the target; azimuth undefined."""


class EmptyRegion(SensorMgrError):
    pass


class NoFeasibleCandidate(SensorMgrError):
    pass


class InnovationGateExceeded(SensorMgrError):
    pass


class ParseError(SensorMgrError):
    pass


class ValidationError(SensorMgrError):
    """Raised with every violated invariant listed in ``problems``."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


ConfigInvalid = ValidationError


class SimulationError(SensorMgrError):
    """Numeric failure inside the step loop, annotated with the step index."""

    def __init__(self, step, cause):
        self.step = step
        self.cause = cause
        super().__init__(f"step {step}: {type(cause).__name__}: {cause}")
