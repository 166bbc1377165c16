"""Exception hierarchy shared by every catsim module."""


class CatsimError(Exception):
    """Base class for all errors raised by catsim."""


class ValidationError(CatsimError, ValueError):
    """Input violates a documented precondition (unnormalized density, bad factor, ...)."""


class StructuralError(CatsimError, ValueError):
    """Shapes or widths of two objects do not fit together."""


class ConsistencyError(CatsimError, RuntimeError):
    """An internal invariant was broken, e.g. ancillas left dirty by a noiseless run."""


class NotApplicableError(CatsimError):
    """A statistical test cannot be evaluated on the given data."""
