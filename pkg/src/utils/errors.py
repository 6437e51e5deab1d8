"""Exception hierarchy shared by all solvers and the CLI."""

from typing import Iterable, Optional, Sequence


class ModMirrorError(Exception):
    """Base class for all library errors."""


class ValidationError(ModMirrorError, ValueError):
    """Input rejected before any computation (CLI exit code 2)."""


class SolverError(ModMirrorError, RuntimeError):
    """Computation failed or produced an untrustworthy result (CLI exit code 3)."""


class InvalidParameter(ValidationError):
    """One or more type invariants are violated.

    ``fields`` holds the dotted path of every offending field, e.g.
    ``emitters.1.gamma2``.
    """

    def __init__(self, fields: Iterable[str], message: Optional[str] = None):
        self.fields: Sequence[str] = tuple(fields)
        detail = message or "invalid parameter"
        super().__init__(f"{detail}: {', '.join(self.fields)}")


class DegenerateInput(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class ZeroBackground(ValidationError):
    pass


class NonConvergence(SolverError):
    pass


class SingularSystem(SolverError):
    pass


class StepSizeTooLarge(SolverError):
    pass


class NonStationary(SolverError):
    pass


class DimensionTooLarge(SolverError):
    pass


class PositivityLost(SolverError):
    pass


class Undefined(SolverError):
    """Figure of merit has no value for the given inputs (e.g. 0/0)."""


class AmplitudeTooSmall(SolverError):
    pass


class FitDiverged(SolverError):
    pass
