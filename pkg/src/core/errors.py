"""
Exception types raised by the core engine.

Every error is a ValueError so callers that only care about "bad input"
can catch one type, while the CLI can still tell them apart.
"""


class ModulusError(ValueError):
    """Modulus out of range, mismatched, or not dividing the ambient modulus."""


class EnumerationCeilingError(ValueError):
    """A group is too large for exhaustive treatment."""

    def __init__(self, message: str, ceiling: int):
        super().__init__(message)
        self.ceiling = ceiling


class QuotientError(ValueError):
    """A requested quotient is not an abelian group."""


class SingularCurveError(ValueError):
    """A Weierstrass model with zero discriminant."""


class BadReductionError(ValueError):
    """The curve has (possible) bad reduction at the requested prime."""

    def __init__(self, prime: int):
        super().__init__(f"Bad reduction at {prime}: discriminant or a coefficient "
                         f"denominator is divisible by {prime}")
        self.prime = prime


class PoleError(ValueError):
    """A rational map evaluated at one of its poles."""


class GroupFileError(ValueError):
    """A malformed group file."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class NoPrimesError(ValueError):
    """A prime scan found nothing to work with."""
