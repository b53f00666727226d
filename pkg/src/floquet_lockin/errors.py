"""Exception hierarchy shared by the library and the CLI."""


class FloquetError(Exception):
    """Base class for every error raised by this package."""


class StructureError(FloquetError, ValueError):
    """Malformed input data (e.g. harmonic matrices of mismatched shape)."""


class ParameterError(FloquetError, ValueError):
    """A parameter violates its documented range."""


class NumericError(FloquetError, ArithmeticError):
    """A numerical procedure failed (non-convergence, empty spectrum, overflow)."""


class SearchError(NumericError):
    """The critical-load search found no crossing inside its bracket."""

    def __init__(self, message, f_lo=None, f_hi=None):
        super().__init__(message)
        self.f_lo = f_lo
        self.f_hi = f_hi


class ConfigError(FloquetError, ValueError):
    """Invalid job configuration; ``line`` and ``key`` locate the problem when known."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.key = key
