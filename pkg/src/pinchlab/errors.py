"""Exception hierarchy shared by the library and the command line."""


class PinchlabError(Exception):
    """Base class for all errors raised by pinchlab."""


class DomainError(PinchlabError, ValueError):
    """An argument lies outside the domain of a geometric function."""


class DegenerateError(PinchlabError):
    """A radial quantity is undefined because the point coincides with the base point."""


class ImmersionError(PinchlabError):
    """The chart fails to be an immersion at some sample."""

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params


class HemisphereError(PinchlabError):
    """Spherical data not contained in an open hemisphere."""


class ClassViolation(PinchlabError):
    """The hypersurface is not in the admissible class (some H_k is not positive)."""


class ParseError(PinchlabError, ValueError):
    """Malformed input file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(PinchlabError, ValueError):
    """Invalid run configuration."""


class SolverError(PinchlabError):
    """An iterative solver failed to converge."""
