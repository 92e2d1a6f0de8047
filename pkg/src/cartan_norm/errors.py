"""Exception hierarchy shared by every module of the package."""


class CartanError(Exception):
    """Base class for all errors raised by cartan_norm."""


class InvalidInput(CartanError, ValueError):
    pass


class SingularJet(CartanError, ZeroDivisionError):
    pass


class DomainError(CartanError, ArithmeticError):
    """A value left the domain of a square root, a power, or a family's s-interval."""


class NumericOverflow(CartanError, OverflowError):
    pass


class NonPositiveDefinite(CartanError):
    pass


class DegenerateFrame(CartanError):
    """The Berwald frame cannot be normalized at this direction.

    ``theta`` carries the offending angle when raised from a scan.
    """

    def __init__(self, message, theta=None):
        super().__init__(message)
        self.theta = theta


class UnsupportedFamily(CartanError):
    pass


class SingularSplit(CartanError):
    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


class RiemannianFlag(CartanError):
    pass


class SingularODE(CartanError):
    pass


class QuadratureFailure(CartanError):
    pass
