"""
Exact arithmetic for 2x2 invertible matrices over Z/NZ.
"""

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from math import gcd, prod
from typing import Iterator, List, Sequence

from sympy import factorint
from sympy.ntheory.modular import crt

from .errors import ModulusError

# Largest modulus accepted by GL2Element. Covers every 2-adic level up to 32
# and the composite levels 10 and 12.
MODULUS_CEILING = 64

# Per-thread (per-context) override of the ceiling.
_ceiling: ContextVar[int] = ContextVar('modulus_ceiling', default=MODULUS_CEILING)


def current_ceiling() -> int:
    """The modulus ceiling in force in the calling context."""
    return _ceiling.get()


@contextmanager
def modulus_ceiling(limit: int) -> Iterator[int]:
    """
    Temporarily raise the modulus ceiling (never lowers it).

    The override lives in a context variable, so claims running on other
    worker threads keep the default ceiling.

    Args:
        limit: Largest modulus to accept inside the block

    Yields:
        The ceiling in force inside the block
    """
    token = _ceiling.set(max(_ceiling.get(), int(limit)))
    try:
        yield _ceiling.get()
    finally:
        _ceiling.reset(token)


def check_modulus(modulus: int) -> int:
    """Validate a modulus against the ceiling and return it as an int."""
    modulus = int(modulus)
    if modulus < 2:
        raise ModulusError(f"Modulus must be at least 2, got {modulus}")
    ceiling = _ceiling.get()
    if modulus > ceiling:
        raise ModulusError(f"Modulus {modulus} exceeds the ceiling {ceiling}")
    return modulus


def prime_power_factors(modulus: int) -> List[int]:
    """Maximal prime powers dividing the modulus, by increasing prime."""
    return [p ** e for p, e in sorted(factorint(modulus).items())]


def gl2_order(modulus: int) -> int:
    """
    Order of GL(2, Z/NZ).

    Each prime power p^k contributes p(p-1)(p^2-1) * p^(4(k-1)).
    """
    return prod(p * (p - 1) * (p * p - 1) * p ** (4 * (k - 1))
                for p, k in factorint(modulus).items())


@dataclass(frozen=True)
class CharPoly:
    """Characteristic polynomial x^2 - trace*x + det of a matrix mod N."""

    modulus: int
    trace: int
    det: int

    def __post_init__(self):
        object.__setattr__(self, 'trace', int(self.trace) % self.modulus)
        object.__setattr__(self, 'det', int(self.det) % self.modulus)
        if gcd(self.det, self.modulus) != 1:
            raise ValueError(f"det {self.det} is not a unit mod {self.modulus}")

    def __str__(self) -> str:
        return f"({self.trace}, {self.det})"


@dataclass(frozen=True)
class GL2Element:
    """
    A matrix (a, b; c, d) in GL(2, Z/NZ).

    Entries are stored reduced to [0, N) and the determinant is checked to be
    a unit when the element is built.
    """

    modulus: int
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        modulus = check_modulus(self.modulus)
        object.__setattr__(self, 'modulus', modulus)
        for name in ('a', 'b', 'c', 'd'):
            object.__setattr__(self, name, int(getattr(self, name)) % modulus)
        if gcd(self.det, modulus) != 1:
            raise ValueError(f"Matrix {self} is not invertible mod {modulus} "
                             f"(det = {self.det})")

    @classmethod
    def identity(cls, modulus: int) -> 'GL2Element':
        return cls(modulus, 1, 0, 0, 1)

    @classmethod
    def parse(cls, text: str, modulus: int) -> 'GL2Element':
        """
        Parse the "a,b;c,d" text format (row-major, whitespace ignored).

        Args:
            text: Matrix text
            modulus: Modulus to reduce the entries by

        Returns:
            The parsed element
        """
        compact = "".join(text.split())
        rows = compact.split(';')
        if len(rows) != 2:
            raise ValueError(f"Matrix '{text}' must have two rows separated by ';'")
        try:
            entries = [int(v) for row in rows for v in row.split(',')]
        except ValueError:
            raise ValueError(f"Matrix '{text}' has a non-integer entry") from None
        if len(entries) != 4 or any(len(row.split(',')) != 2 for row in rows):
            raise ValueError(f"Matrix '{text}' must have exactly two entries per row")
        return cls(modulus, *entries)

    @classmethod
    def from_code(cls, code: int, modulus: int) -> 'GL2Element':
        """Inverse of the `code` property."""
        code, d = divmod(int(code), modulus)
        code, c = divmod(code, modulus)
        a, b = divmod(code, modulus)
        return cls(modulus, a, b, c, d)

    @property
    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @property
    def det(self) -> int:
        return (self.a * self.d - self.b * self.c) % self.modulus

    @property
    def trace(self) -> int:
        return (self.a + self.d) % self.modulus

    @property
    def code(self) -> int:
        """Integer encoding ((a*N + b)*N + c)*N + d used by the group engine."""
        n = self.modulus
        return ((self.a * n + self.b) * n + self.c) * n + self.d

    @property
    def is_identity(self) -> bool:
        return self.entries == (1, 0, 0, 1)

    def compose(self, other: 'GL2Element') -> 'GL2Element':
        """Matrix product self * other."""
        if other.modulus != self.modulus:
            raise ModulusError(f"Cannot compose elements mod {self.modulus} "
                               f"and mod {other.modulus}")
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return GL2Element(self.modulus, a * e + b * g, a * f + b * h,
                          c * e + d * g, c * f + d * h)

    def __mul__(self, other: 'GL2Element') -> 'GL2Element':
        return self.compose(other)

    def inverse(self) -> 'GL2Element':
        # adjugate times det^-1
        det_inv = pow(self.det, -1, self.modulus)
        return GL2Element(self.modulus, self.d * det_inv, -self.b * det_inv,
                          -self.c * det_inv, self.a * det_inv)

    def __pow__(self, exponent: int) -> 'GL2Element':
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = GL2Element.identity(self.modulus)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def order(self) -> int:
        return element_order(self)

    def charpoly(self) -> CharPoly:
        return charpoly(self)

    def reduce(self, modulus: int) -> 'GL2Element':
        return reduce(self, modulus)

    def crt_decompose(self) -> List['GL2Element']:
        return crt_decompose(self)

    def __str__(self) -> str:
        return f"{self.a},{self.b};{self.c},{self.d}"


def compose(x: GL2Element, y: GL2Element) -> GL2Element:
    """Matrix product x*y mod N."""
    return x.compose(y)


def element_order(g: GL2Element) -> int:
    """
    Least k >= 1 with g^k = 1.

    Starts from |GL(2, Z/NZ)| and divides out each prime while the power
    stays trivial, so only O(log |G|) exponentiations are needed.
    """
    order = gl2_order(g.modulus)
    for p, e in factorint(order).items():
        for _ in range(e):
            if (g ** (order // p)).is_identity:
                order //= p
            else:
                break
    return order


def charpoly(g: GL2Element) -> CharPoly:
    return CharPoly(g.modulus, g.trace, g.det)


def reduce(g: GL2Element, modulus: int) -> GL2Element:
    """
    Entrywise reduction to a divisor M of N.

    Raises:
        ModulusError: If M does not divide N
    """
    modulus = int(modulus)
    if modulus < 2 or g.modulus % modulus:
        raise ModulusError(f"Cannot reduce mod {g.modulus} to mod {modulus}: "
                           f"{modulus} does not divide {g.modulus}")
    return GL2Element(modulus, *g.entries)


def crt_decompose(g: GL2Element) -> List[GL2Element]:
    """Reductions of g to each maximal prime power dividing N."""
    return [reduce(g, q) for q in prime_power_factors(g.modulus)]


def crt_combine(parts: Sequence[GL2Element]) -> GL2Element:
    """
    Rebuild an element from reductions modulo pairwise coprime moduli.

    Args:
        parts: Components, e.g. the output of crt_decompose

    Returns:
        The unique element mod the product of the moduli
    """
    moduli = [part.modulus for part in parts]
    for i, m in enumerate(moduli):
        for n in moduli[i + 1:]:
            if gcd(m, n) != 1:
                raise ModulusError(f"Moduli {moduli} are not pairwise coprime")
    entries = []
    for index in range(4):
        residue, _ = crt(moduli, [part.entries[index] for part in parts])
        entries.append(int(residue))
    return GL2Element(prod(moduli), *entries)
