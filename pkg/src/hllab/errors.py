"""Exception types shared by every module."""


class HLLabError(Exception):
    """Base class for all errors raised by hllab."""


class DomainError(HLLabError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class ExponentOverflow(HLLabError, ArithmeticError):
    """A rational exponent no longer fits in 64-bit numerator/denominator."""


class Unclassified(HLLabError, ValueError):
    """A non-admissible exponent pair falls in none of the regions R1-R4."""


class SpecMismatch(HLLabError, ValueError):
    """Mixed-norm spec length differs from the tensor order."""


class DimMismatch(HLLabError, ValueError):
    """Vector or tensor dimensions disagree."""


class TooLarge(HLLabError, ValueError):
    """Exhaustive enumeration exceeds its size guard."""


class ZeroNorm(HLLabError, ZeroDivisionError):
    """A quotient was requested with a vanishing norm in the denominator."""
