"""Exception hierarchy shared by every module."""


class ParabolicError(Exception):
    """Base class for all toolkit errors."""


class WindowError(ParabolicError):
    """A query or support escapes the finite window a model was declared on."""


class PreconditionError(ParabolicError):
    """An operation was called on inputs outside its contract."""


class DegenerateInputError(PreconditionError):
    """Too few samples, empty boundary, or another degenerate input."""


class RejectedQueryError(PreconditionError):
    """A Harnack query whose endpoints are not separated enough in time."""


class ResolutionError(ParabolicError):
    """The requested quantity is not resolvable at the model resolution."""


class AmbiguityError(ResolutionError):
    """Boundary components cannot be told apart at the grid resolution."""


class SolverError(ParabolicError):
    """The caloric solver detected an internal inconsistency."""


class SpecParseError(ParabolicError):
    """Malformed domain spec or config file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
