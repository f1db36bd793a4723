"""Exception types raised across the package."""


class RwCollideError(Exception):
    """Base class for all package errors."""


class InvalidParameter(RwCollideError, ValueError):
    pass


class SolverFailure(RwCollideError, RuntimeError):
    pass


class HypothesisViolation(RwCollideError):
    """An operation needs reversibility or transitivity and the chain lacks it."""


class CapacityExceeded(RwCollideError):
    pass


class InconclusiveEstimate(RwCollideError):
    """A Monte Carlo estimate cannot be reported (too much censoring, low acceptance)."""


class ChainFormatError(RwCollideError, ValueError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
