"""Exception hierarchy.

Every error class carries a distinct ``exit_code`` which the CLI uses
verbatim, so the code map below is the single source of truth.
"""

from __future__ import annotations


class UnderbarrierError(Exception):
    """Base class for all solver errors."""

    exit_code = 1

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


class ConfigError(UnderbarrierError):
    exit_code = 2

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message, line=line, field=field)
        self.line = line
        self.field = field


class NoConvergence(UnderbarrierError):
    """Newton iteration exhausted; ``last`` and ``residual`` describe the final iterate."""

    exit_code = 3

    def __init__(self, message: str, *, last=None, residual=None):
        super().__init__(message, last=last, residual=residual)
        self.last = last
        self.residual = residual


class NearFold(UnderbarrierError):
    """The requested point sits on or beyond a fold of the saddle map."""

    exit_code = 4


class StepCollapse(UnderbarrierError):
    exit_code = 5


class QuadratureFailure(UnderbarrierError):
    exit_code = 6


class NoRealRoot(UnderbarrierError):
    exit_code = 7


class FoldsMerged(UnderbarrierError):
    exit_code = 8


class WindowViolation(UnderbarrierError):
    exit_code = 9


class TracerStall(UnderbarrierError):
    exit_code = 10


class NoRoot(UnderbarrierError):
    exit_code = 11


class RegimeViolation(UnderbarrierError):
    exit_code = 12


class SolverFailure(UnderbarrierError):
    exit_code = 13


class OutOfRange(UnderbarrierError):
    exit_code = 14


class DomainError(UnderbarrierError):
    exit_code = 15


class IntegratorTolerance(UnderbarrierError):
    exit_code = 16


class IoError(UnderbarrierError):
    exit_code = 17


EXIT_CODES = {
    cls.__name__: cls.exit_code
    for cls in (
        UnderbarrierError,
        ConfigError,
        NoConvergence,
        NearFold,
        StepCollapse,
        QuadratureFailure,
        NoRealRoot,
        FoldsMerged,
        WindowViolation,
        TracerStall,
        NoRoot,
        RegimeViolation,
        SolverFailure,
        OutOfRange,
        DomainError,
        IntegratorTolerance,
        IoError,
    )
}


class TruncationWarning(UserWarning):
    """A semi-infinite quadrature was truncated; ``tail_bound`` is the neglected relative tail."""

    def __init__(self, message: str, tail_bound: float):
        super().__init__(message)
        self.tail_bound = tail_bound
