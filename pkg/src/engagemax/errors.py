"""Exception hierarchy shared by the solvers, simulators and the CLI."""


class EngagemaxError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InputError(EngagemaxError, ValueError):
    """Malformed or inconsistent input (dimension mismatch, invalid belief...)."""

    exit_code = 2


class InfeasibleError(InputError):
    """A linear program or restricted problem has no feasible point."""


class CapabilityError(EngagemaxError):
    """The requested computation is outside what the solvers support."""

    exit_code = 3


class NumericalError(EngagemaxError):
    """An iterative method failed to converge or produced an invalid root.

    ``residual`` is the last residual seen and ``diagnostics`` carries any
    extra data (e.g. the sampled constraint curve of a failed bisection).
    """

    exit_code = 4

    def __init__(self, message, residual=None, diagnostics=None):
        super().__init__(message)
        self.residual = residual
        self.diagnostics = diagnostics


class AuditFailure(EngagemaxError):
    """A Monte-Carlo audit or property check failed beyond tolerance."""

    exit_code = 5

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class PropertyViolation(AuditFailure):
    """A theoretical property (extreme beliefs, garbling...) was violated."""
