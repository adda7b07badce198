"""Exception types shared across the package."""


class AinftyError(Exception):
    """Base class for all package errors."""


class ContextMismatchError(AinftyError):
    """Two series (or elements) built over different parameter contexts."""


class UnknownParameterError(AinftyError):
    """A parameter name not present in the context."""


class SpaceMismatchError(AinftyError):
    """Operands live over different graded spaces."""


class DegreeError(AinftyError):
    """A degree precondition failed (odd parameter, inhomogeneous sum, ...)."""


class TruncationOverflow(AinftyError):
    """A product left the polynomial-degree window and silent dropping is off."""


class PreconditionError(AinftyError):
    """An operation-level precondition failed (bad MC seed, wrong flow degree, ...)."""
