"""Exception types shared by every evaluator in the package."""


class DomainError(ValueError):
    """An argument lies outside the region where a formula is defined."""


class ConvergenceError(ArithmeticError):
    """A series, quadrature or inversion failed to reach the requested accuracy.

    Attributes
    ----------
    partial : float or None
        Best value available when the evaluator gave up.
    terms : int or None
        Number of series terms (or quadrature nodes) consumed.
    """

    def __init__(self, message, partial=None, terms=None):
        super().__init__(message)
        self.partial = partial
        self.terms = terms
