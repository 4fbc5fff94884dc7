"""Error hierarchy shared by the toolkit modules"""


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit"""

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{self.message} ({details})"


class NonHermitian(ToolkitError):
    """Matrix asymmetry exceeds the hermiticity tolerance"""


class DimensionMismatch(ToolkitError):
    """Operand shapes do not agree"""


class DimensionTooLarge(ToolkitError):
    """Requested construction exceeds the configured dimension guard"""


class NonConvergence(ToolkitError):
    """An optimization did not reach the requested accuracy"""


class Infeasible(ToolkitError):
    """An optimization problem has no feasible point"""


class InvalidEpsilon(ToolkitError):
    """Smoothing or error parameter outside [0, 1)"""


class DegenerateSample(ToolkitError):
    """Random element of an algebra had coinciding eigenvalues too often"""


class NotClosedUnderStar(ToolkitError):
    """Computed operator space is not closed under the adjoint"""


class ConstructionFailed(ToolkitError):
    """A constructed object failed its verification identity"""


class PreconditionViolated(ToolkitError):
    """Operator inequality required by a construction does not hold"""


class ConfigError(ToolkitError):
    """Experiment configuration could not be resolved"""
