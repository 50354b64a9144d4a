"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when arguments violate a documented precondition."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap.

    The best iterate found so far is kept on the exception so callers can
    still inspect (or record) it.
    """

    def __init__(self, message, best=None, kkt_violation=float("nan"), iterations=0):
        super().__init__(message)
        self.best = best
        self.kkt_violation = kkt_violation
        self.iterations = iterations


class CurveTooShortError(ValueError):
    """An error curve has fewer than three distinct abscissae."""


class MappingUnavailableError(ValueError):
    """A curve carries no lambda annotations, so knots cannot be mapped back."""


class ParseError(ValueError):
    """Malformed dataset file. ``row`` and ``col`` are 1-based (header excluded)."""

    def __init__(self, message, row=None, col=None):
        where = ""
        if row is not None:
            where = f" at (row={row}, col={col})"
        super().__init__(message + where)
        self.row = row
        self.col = col
