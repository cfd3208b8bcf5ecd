"""Exception hierarchy for sompbound."""


class SompBoundError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SompBoundError, ValueError):
    pass


class SymmetryError(SompBoundError, ValueError):
    pass


class SingularMatrixError(SompBoundError, ArithmeticError):
    """Raised when a matrix that must have full column rank does not.

    ``rank`` is the number of leading columns found independent and
    ``n_columns`` the number supplied.
    """

    def __init__(self, message, rank=None, n_columns=None, trace=None):
        super().__init__(message)
        self.rank = rank
        self.n_columns = n_columns
        self.trace = trace


class ConvergenceError(SompBoundError, ArithmeticError):
    pass


class DomainError(SompBoundError, ValueError):
    pass


class BudgetError(SompBoundError, ValueError):
    """Exhaustive enumeration would exceed the configured budget."""

    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget


class RipViolationError(SompBoundError, ValueError):
    """A bound was requested with delta >= 1, outside the theorems' hypotheses."""


class ReselectionError(SompBoundError, ArithmeticError):
    """SOMP selected an atom that is already in the support.

    In exact arithmetic the metric of a selected atom is zero, so this only
    happens when the residual has (numerically) vanished or the selected
    atoms are badly conditioned.  ``trace`` holds the iterations done so far.
    """

    def __init__(self, message, atom=None, trace=None):
        super().__init__(message)
        self.atom = atom
        self.trace = trace


class NotApplicableError(SompBoundError, ValueError):
    pass
