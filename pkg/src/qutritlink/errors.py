"""Exception types raised across the package."""


class InvariantError(ValueError):
    """A value violates a documented physical invariant (norm, trace, PSD, ...)."""


class ReconstructionError(RuntimeError):
    """Tomographic reconstruction could not produce an estimate."""


class ConvergenceError(ReconstructionError):
    """An optimizer hit its iteration cap before converging."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class FitError(RuntimeError):
    """Curve fitting failed or the data cannot constrain the fit."""


class TableFormatError(ValueError):
    """Malformed input file; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
