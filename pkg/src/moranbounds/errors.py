"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class MoranError(Exception):
    exit_code = 1


class InputConstraintError(MoranError, ValueError):
    """Malformed input or a violated structural constraint."""

    exit_code = 2


class SizeCapError(MoranError, ValueError):
    """Problem size exceeds a solver cap."""

    exit_code = 3


class GraphInvalidError(MoranError, ValueError):
    """Graph is unusable for the requested computation (e.g. disconnected)."""

    exit_code = 4


class ParameterDomainError(MoranError, ValueError):
    """A numeric parameter lies outside the domain where the result is defined."""

    exit_code = 5


class ConvergenceError(MoranError, RuntimeError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class AllRunsTimedOut(MoranError, RuntimeError):
    pass
