"""Exception types shared across the package."""


class HeisWhitneyError(Exception):
    """Base class for all package errors."""


class DomainError(HeisWhitneyError, ValueError):
    """An argument lies outside the domain of the operation."""


class InconsistentDataError(HeisWhitneyError, ValueError):
    """Input data contradicts itself (e.g. one point carrying two values)."""


class ResolutionError(HeisWhitneyError, ValueError):
    """Sampled data is too coarse for the requested estimate."""


class CoverageError(HeisWhitneyError):
    """No parameter in a schedule reached the requested measure target."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ValidationError(HeisWhitneyError):
    """Jet data fails one of the three extension conditions.

    ``condition`` is 1 (Whitney field), 2 (Leibniz identity for the
    vertical jet) or 3 (area/velocity bound).
    """

    def __init__(self, condition, message, report=None):
        super().__init__(f"condition ({condition}) failed: {message}")
        self.condition = condition
        self.report = report


class AdmissibilityError(HeisWhitneyError):
    """A gap repair exceeded its sup-norm guard.

    Carries the offending gap and the lower bound on the A/V constant the
    data would need for the repair to have fit under the guard.
    """

    def __init__(self, message, gap=None, implied_av_bound=None):
        super().__init__(message)
        self.gap = gap
        self.implied_av_bound = implied_av_bound
