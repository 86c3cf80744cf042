"""Exception hierarchy. Everything raised on purpose derives from ``SparseOUError``."""


class SparseOUError(Exception):
    """Base class for domain errors (mapped to exit status 1 by the CLI)."""


class AssumptionHError(SparseOUError):
    """The drift matrix is not diagonalisable with spectrum in the open right half-plane."""


class EigenSolverError(SparseOUError):
    pass


class SingularSystemError(SparseOUError):
    """A linear system (Lyapunov, Gram matrix) is singular or too ill-conditioned."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class InfeasibleError(SparseOUError):
    """A Dantzig row LP has an empty feasible set."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class CholeskyError(SparseOUError):
    pass


class ParseError(SparseOUError):
    """Malformed input file; the message names the file and the offending line/field."""
