"""Exception hierarchy shared by every engine in the package."""


class U3Error(Exception):
    """Base class for all package errors."""


class NonUnit(U3Error, ArithmeticError):
    pass


class InsufficientPrecision(U3Error):
    """A valuation comparison cannot be decided at the working precision."""


class NotUnitary(U3Error):
    pass


class ConstraintViolated(U3Error, ValueError):
    pass


class ModuleTooLarge(U3Error):
    pass


class GuardExceeded(U3Error):
    pass


class LiftFailed(U3Error):
    pass


class RankDeficient(U3Error):
    pass


class NotInSubgroup(U3Error):
    pass


class TraceObstruction(U3Error):
    """Raised if a ladder coset lookup meets a residue that is not trace-zero."""


class NotFactorizable(U3Error):
    pass


class MismatchAgainstFormula(U3Error):
    """An oracle pipeline disagrees with a closed formula."""

    def __init__(self, message, evidence=None):
        super().__init__(message)
        self.evidence = evidence
