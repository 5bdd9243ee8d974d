"""Exception hierarchy shared by every dipolesim module.

The CLI maps these onto exit codes: ConfigError -> 2, I/O errors -> 3 and
any PhysicsError subclass -> 4.
"""


class DipoleSimError(Exception):
    """Base class for all dipolesim errors."""


class DomainError(DipoleSimError, ValueError):
    """A physical parameter is outside its valid domain."""


class ConfigError(DipoleSimError):
    """Config file problem; carries the offending line when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class PhysicsError(DipoleSimError):
    """Base class for runtime numerical/physics failures (CLI exit 4)."""


class SingularityError(PhysicsError):
    """Field or Green-function evaluation inside the exclusion radius."""


class SolverError(PhysicsError):
    """Iterative solver failed to converge; carries the last residual."""

    def __init__(self, message, residual=None):
        if residual is not None:
            message = f"{message} (last residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class VelocityLimitError(PhysicsError):
    """A charge exceeded the configured speed limit; carries the step index."""

    def __init__(self, step, speed, limit):
        super().__init__(
            f"charge speed {speed:.6e} m/s exceeds limit {limit:.6e} m/s "
            f"at step {step}"
        )
        self.step = step
        self.speed = speed
        self.limit = limit


class PoleError(PhysicsError):
    """Evaluation exactly on a resonance pole of a lossless model."""


class NumericsError(PhysicsError):
    """Quadrature or eigensolver failure; carries the achieved tolerance."""


class DegenerateInputError(DipoleSimError, ValueError):
    """Input admits no well-defined answer (e.g. normalizing an all-zero series)."""


class HorizonError(PhysicsError):
    """Query before the retained window of a bounded trajectory history."""
