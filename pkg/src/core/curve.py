"""
Elliptic curves over Q and their reductions modulo primes.

Covers Weierstrass models with exact rational coefficients, quadratic
twists, point counting and group structure over F_l, x-division
polynomials and rational torsion.
"""

import logging
import random
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sympy import Poly, Rational, factor_list, factorint, integer_nthroot, isprime, sqrt_mod, symbols

from .errors import BadReductionError, SingularCurveError
from .groups import AbelianInvariants
from .modring import CharPoly

logger = logging.getLogger(__name__)

# Largest prime for which points are counted naively.
COUNTING_BOUND = 10 ** 5

# Consecutive random points that must fail to enlarge the exponent before
# the group structure over F_l is accepted.
STRUCTURE_CONFIRMATIONS = 20

DEFAULT_SEED = 0

X = symbols('x')

Point = Optional[Tuple]  # None is the point at infinity


def _rational(value) -> Rational:
    if isinstance(value, str):
        try:
            return Rational(value.strip())
        except (TypeError, ValueError):
            raise ValueError(f"'{value}' is not a rational number") from None
    return Rational(value)


@dataclass(frozen=True)
class RationalCurve:
    """
    Weierstrass model y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q.

    The model is taken as given (no minimisation), so `discriminant` is the
    discriminant of this model.
    """

    a1: Rational
    a2: Rational
    a3: Rational
    a4: Rational
    a6: Rational

    def __post_init__(self):
        for name in ('a1', 'a2', 'a3', 'a4', 'a6'):
            object.__setattr__(self, name, _rational(getattr(self, name)))
        if self.discriminant == 0:
            raise SingularCurveError(f"Curve {self} is singular (discriminant 0)")

    @classmethod
    def parse(cls, text: str) -> 'RationalCurve':
        """
        Parse "a1,a2,a3,a4,a6" or the short form "A,B" (rationals as "p/q").
        """
        parts = [p for p in "".join(text.split()).split(',')]
        if len(parts) not in (2, 5) or any(not p for p in parts):
            raise ValueError(f"Curve '{text}' must have 2 or 5 comma-separated coefficients")
        values = [_rational(p) for p in parts]
        if len(values) == 2:
            values = [0, 0, 0] + values
        return cls(*values)

    @property
    def coefficients(self) -> Tuple[Rational, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def is_short(self) -> bool:
        return self.a1 == 0 and self.a2 == 0 and self.a3 == 0

    @property
    def b2(self) -> Rational:
        return self.a1 ** 2 + 4 * self.a2

    @property
    def b4(self) -> Rational:
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self) -> Rational:
        return self.a3 ** 2 + 4 * self.a6

    @property
    def b8(self) -> Rational:
        a1, a2, a3, a4, a6 = self.coefficients
        return a1 ** 2 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 ** 2 - a4 ** 2

    @property
    def c4(self) -> Rational:
        return self.b2 ** 2 - 24 * self.b4

    @property
    def c6(self) -> Rational:
        return -self.b2 ** 3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @property
    def discriminant(self) -> Rational:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 ** 2 * b8 - 8 * b4 ** 3 - 27 * b6 ** 2 + 9 * b2 * b4 * b6

    @property
    def j_invariant(self) -> Rational:
        return self.c4 ** 3 / self.discriminant

    def short_model(self) -> 'RationalCurve':
        """The isomorphic model y^2 = x^3 - 27 c4 x - 54 c6."""
        return RationalCurve(0, 0, 0, -27 * self.c4, -54 * self.c6)

    def two_division_cubic(self) -> Poly:
        """4x^3 + b2 x^2 + 2 b4 x + b6, i.e. (2y + a1 x + a3)^2 on the curve."""
        return Poly(4 * X ** 3 + self.b2 * X ** 2 + 2 * self.b4 * X + self.b6, X, domain='QQ')

    def equation(self) -> str:
        def term(coefficient, monomial):
            if coefficient == 0:
                return ""
            sign = " - " if coefficient < 0 else " + "
            value = abs(coefficient)
            if not monomial:
                return f"{sign}{value}"
            return f"{sign}{'' if value == 1 else value}{monomial}"
        left = "y^2" + term(self.a1, "xy") + term(self.a3, "y")
        right = "x^3" + term(self.a2, "x^2") + term(self.a4, "x") + term(self.a6, "")
        return f"{left} = {right}"

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.coefficients)


def curve_from_coeffs(coeffs: Sequence) -> RationalCurve:
    """
    Build a curve from [a1, a2, a3, a4, a6] (or [A, B] for a short model).

    Raises:
        SingularCurveError: If the discriminant vanishes
    """
    coeffs = list(coeffs)
    if len(coeffs) == 2:
        coeffs = [0, 0, 0] + coeffs
    if len(coeffs) != 5:
        raise ValueError(f"Expected 2 or 5 coefficients, got {len(coeffs)}")
    return RationalCurve(*coeffs)


def quadratic_twist(curve: RationalCurve, d: int) -> RationalCurve:
    """
    Twist by d: y^2 = x^3 - 27 d^2 c4 x - 54 d^3 c6.

    Args:
        curve: Curve to twist
        d: Non-zero (squarefree) integer

    Returns:
        The twist, as a short model
    """
    d = int(d)
    if d == 0:
        raise ValueError("Cannot twist by 0")
    return RationalCurve(0, 0, 0, -27 * d ** 2 * curve.c4, -54 * d ** 3 * curve.c6)


def _is_rational_power(value: Rational, k: int) -> bool:
    if value == 0:
        return True
    if value < 0 and k % 2 == 0:
        return False
    return (integer_nthroot(abs(int(value.p)), k)[1]
            and integer_nthroot(int(value.q), k)[1])


def is_isomorphic(first: RationalCurve, second: RationalCurve) -> bool:
    """
    Q-isomorphism test.

    With short models (A, B) and (A', B'), the curves are isomorphic iff
    A' = u^4 A and B' = u^6 B for some rational u.
    """
    if first.j_invariant != second.j_invariant:
        return False
    a, b = first.short_model().a4, first.short_model().a6
    a2, b2 = second.short_model().a4, second.short_model().a6
    if a == 0:
        return _is_rational_power(b2 / b, 6)
    if b == 0:
        return _is_rational_power(a2 / a, 4)
    ratio = (b2 * a) / (b * a2)
    return _is_rational_power(ratio, 2) and a2 == ratio ** 2 * a and b2 == ratio ** 3 * b


# ---------------------------------------------------------------------------
# Points over a field
# ---------------------------------------------------------------------------

def _add(coeffs, p: Point, q: Point, divide, normalise) -> Point:
    """Chord-and-tangent addition on a long Weierstrass model."""
    if p is None:
        return q
    if q is None:
        return p
    a1, a2, a3, a4, a6 = coeffs
    x1, y1 = p
    x2, y2 = q
    if normalise(x1 - x2) == 0:
        if normalise(y1 + y2 + a1 * x2 + a3) == 0:
            return None
        denominator = 2 * y1 + a1 * x1 + a3
        slope = divide(3 * x1 ** 2 + 2 * a2 * x1 + a4 - a1 * y1, denominator)
        intercept = divide(-x1 ** 3 + a4 * x1 + 2 * a6 - a3 * y1, denominator)
    else:
        slope = divide(y2 - y1, x2 - x1)
        intercept = divide(y1 * x2 - y2 * x1, x2 - x1)
    x3 = normalise(slope ** 2 + a1 * slope - a2 - x1 - x2)
    y3 = normalise(-(slope + a1) * x3 - intercept - a3)
    return (x3, y3)


def _multiply(coeffs, p: Point, k: int, divide, normalise) -> Point:
    if k < 0:
        a1, _, a3, _, _ = coeffs
        p = None if p is None else (p[0], normalise(-p[1] - a1 * p[0] - a3))
        k = -k
    result = None
    while k:
        if k & 1:
            result = _add(coeffs, result, p, divide, normalise)
        p = _add(coeffs, p, p, divide, normalise)
        k >>= 1
    return result


def add_points(curve: RationalCurve, p: Point, q: Point) -> Point:
    """P + Q on a curve over Q."""
    return _add(curve.coefficients, p, q, lambda a, b: a / b, lambda v: v)


def multiply_point(curve: RationalCurve, p: Point, k: int) -> Point:
    return _multiply(curve.coefficients, p, k, lambda a, b: a / b, lambda v: v)


def point_order(curve: RationalCurve, p: Point, limit: int = 16) -> int:
    """Order of a point over Q, or 0 if it exceeds `limit` (non-torsion)."""
    current = p
    for k in range(1, limit + 1):
        if current is None:
            return k
        current = add_points(curve, current, p)
    return 0


def on_curve(curve: RationalCurve, p: Point) -> bool:
    if p is None:
        return True
    a1, a2, a3, a4, a6 = curve.coefficients
    x, y = p
    return y ** 2 + a1 * x * y + a3 * y == x ** 3 + a2 * x ** 2 + a4 * x + a6


# ---------------------------------------------------------------------------
# Reduction mod l
# ---------------------------------------------------------------------------

def _reduce_rational(value: Rational, prime: int) -> int:
    if value.q % prime == 0:
        raise BadReductionError(prime)
    return int(value.p) * pow(int(value.q), -1, prime) % prime


@dataclass(frozen=True)
class CurveFp:
    """
    A good reduction of a rational curve at l.

    For l >= 5 the coefficients are those of the short model (0, 0, 0, A, B);
    for l in {2, 3} the long model is kept.
    """

    prime: int
    coefficients: Tuple[int, int, int, int, int]

    def add(self, p: Point, q: Point) -> Point:
        return _add(self.coefficients, p, q, self._divide, self._normalise)

    def multiply(self, p: Point, k: int) -> Point:
        return _multiply(self.coefficients, p, k, self._divide, self._normalise)

    def _divide(self, a: int, b: int) -> int:
        return a * pow(b % self.prime, -1, self.prime) % self.prime

    def _normalise(self, v: int) -> int:
        return v % self.prime

    def points(self) -> List[Point]:
        """All affine points plus None (only sensible for small l)."""
        a1, a2, a3, a4, a6 = self.coefficients
        p = self.prime
        found: List[Point] = [None]
        for x in range(p):
            for y in range(p):
                if (y * y + a1 * x * y + a3 * y - (x ** 3 + a2 * x * x + a4 * x + a6)) % p == 0:
                    found.append((x, y))
        return found

    def count_points(self) -> int:
        p = self.prime
        if p < 5:
            return len(self.points())
        _, _, _, a, b = self.coefficients
        x = np.arange(p, dtype=np.int64)
        rhs = ((x * x % p) * x + a * x + b) % p
        squares = np.zeros(p, dtype=bool)
        squares[(x * x) % p] = True
        chi = np.where(rhs == 0, 0, np.where(squares[rhs], 1, -1))
        return int(p + 1 + chi.sum())

    def random_point(self, rng: random.Random) -> Point:
        """A uniformly chosen x with a rational y (short models only)."""
        p = self.prime
        _, _, _, a, b = self.coefficients
        while True:
            x = rng.randrange(p)
            rhs = (x ** 3 + a * x + b) % p
            if rhs == 0:
                return (x, 0)
            root = sqrt_mod(rhs, p)
            if root is not None:
                return (x, root if rng.random() < 0.5 else (-root) % p)

    def point_order(self, point: Point, multiple: int) -> int:
        """Order of a point given a multiple of it (e.g. the group order)."""
        order = multiple
        for q, e in factorint(multiple).items():
            for _ in range(e):
                if self.multiply(point, order // q) is None:
                    order //= q
                else:
                    break
        return order


def reduce_curve(curve: RationalCurve, prime: int) -> CurveFp:
    """
    Reduce a curve mod l.

    Raises:
        BadReductionError: If l divides the discriminant or a denominator
    """
    if not isprime(prime):
        raise ValueError(f"{prime} is not prime")
    if not has_good_reduction(curve, prime):
        raise BadReductionError(prime)
    if prime < 5:
        coeffs = tuple(_reduce_rational(c, prime) for c in curve.coefficients)
    else:
        c4 = _reduce_rational(curve.c4, prime)
        c6 = _reduce_rational(curve.c6, prime)
        coeffs = (0, 0, 0, (-27 * c4) % prime, (-54 * c6) % prime)
    return CurveFp(prime, coeffs)


def has_good_reduction(curve: RationalCurve, prime: int) -> bool:
    """True when l divides neither the discriminant nor a coefficient denominator."""
    disc = curve.discriminant
    return (disc.p % prime != 0 and disc.q % prime != 0
            and all(c.q % prime != 0 for c in curve.coefficients))


@dataclass(frozen=True)
class FrobData:
    """
    Frobenius at a good prime: trace a_l, point count N_l = l + 1 - a_l and
    optionally E(F_l) = Z/d1 x Z/d2.
    """

    prime: int
    trace: int
    count: int
    structure: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if self.count != self.prime + 1 - self.trace:
            raise ValueError(f"Point count {self.count} != {self.prime} + 1 - {self.trace}")
        if self.trace ** 2 > 4 * self.prime:
            raise ValueError(f"Trace {self.trace} violates the Hasse bound at {self.prime}")
        if self.structure is not None:
            d1, d2 = self.structure
            if not valid_structure(d1, d2, self.prime, self.count):
                raise ValueError(f"Invalid structure Z/{d1} x Z/{d2} at {self.prime}")

    def charpoly(self, modulus: int) -> CharPoly:
        """Characteristic polynomial of Frobenius mod n: (a_l, l)."""
        return CharPoly(modulus, self.trace, self.prime)

    def full_torsion(self, n: int) -> bool:
        if self.structure is None:
            raise ValueError(f"No group structure recorded at {self.prime}")
        return self.structure[0] % n == 0


def valid_structure(d1: int, d2: int, prime: int, count: int) -> bool:
    return d1 * d2 == count and d2 % d1 == 0 and (prime - 1) % d1 == 0


@lru_cache(maxsize=None)
def frobenius_trace(curve: RationalCurve, prime: int) -> int:
    """a_l = l + 1 - #E(F_l) by naive counting."""
    if prime > COUNTING_BOUND:
        raise ValueError(f"Prime {prime} exceeds the counting bound {COUNTING_BOUND}")
    reduced = reduce_curve(curve, prime)
    return prime + 1 - reduced.count_points()


def _structure_small(reduced: CurveFp, count: int) -> Tuple[int, int]:
    exponent = 1
    for point in reduced.points():
        order = reduced.point_order(point, count)
        exponent = exponent * order // gcd(exponent, order)
    return count // exponent, exponent


def group_structure(reduced: CurveFp, count: int, seed: int = DEFAULT_SEED) -> Tuple[int, int]:
    """
    E(F_l) = Z/d1 x Z/d2 from the exponent d2 (lcm of random point orders).

    Points are drawn until STRUCTURE_CONFIRMATIONS consecutive draws leave
    the exponent unchanged and the resulting (d1, d2) is valid.
    """
    prime = reduced.prime
    if prime < 5:
        return _structure_small(reduced, count)
    rng = random.Random(seed * 1_000_003 + prime)
    exponent = 1
    quiet = 0
    draws = 0
    limit = 50 * STRUCTURE_CONFIRMATIONS
    while draws < limit:
        draws += 1
        order = reduced.point_order(reduced.random_point(rng), count)
        if exponent % order:
            exponent = exponent * order // gcd(exponent, order)
            quiet = 0
            continue
        quiet += 1
        if quiet >= STRUCTURE_CONFIRMATIONS:
            if valid_structure(count // exponent, exponent, prime, count):
                return count // exponent, exponent
            logger.warning(f"Structure at {prime} not valid after {draws} draws "
                           f"(exponent {exponent}, count {count}); drawing more")
            quiet = 0
    raise RuntimeError(f"Group structure at {prime} did not stabilise after {limit} draws")


def frobenius_data(curve: RationalCurve, prime: int, want_structure: bool = False,
                   seed: int = DEFAULT_SEED) -> FrobData:
    """
    Frobenius data at a good prime.

    Args:
        curve: Curve over Q
        prime: l <= COUNTING_BOUND
        want_structure: Also compute E(F_l) = Z/d1 x Z/d2
        seed: Base seed; the generator at l is seeded from (seed, l)

    Raises:
        BadReductionError: At primes of bad reduction
    """
    trace = frobenius_trace(curve, prime)
    count = prime + 1 - trace
    structure = None
    if want_structure:
        structure = group_structure(reduce_curve(curve, prime), count, seed)
    return FrobData(prime=prime, trace=trace, count=count, structure=structure)


# ---------------------------------------------------------------------------
# Division polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class XDivisionPoly:
    """
    Polynomial in x whose roots are the x-coordinates of E[n] - {O}.

    For odd n this is psi_n; for even n it is (4x^3 + b2 x^2 + 2 b4 x + b6)
    times psi_n / psi_2, so the 4-division polynomial of a short model has
    leading coefficient 8.
    """

    level: int
    poly: Poly

    @property
    def degree(self) -> int:
        return self.poly.degree()

    @property
    def coefficients(self) -> List[Rational]:
        return [Rational(c) for c in self.poly.all_coeffs()]

    def factors(self) -> List[Tuple[Poly, int]]:
        _, factors = factor_list(self.poly.as_expr(), X)
        return [(Poly(f, X, domain='QQ'), e) for f, e in factors]

    def rational_roots(self) -> List[Rational]:
        roots = set()
        for factor, _ in self.factors():
            if factor.degree() == 1:
                a, b = factor.all_coeffs()
                roots.add(Rational(-b, a))
        return sorted(roots)


@lru_cache(maxsize=None)
def _f_table(curve: RationalCurve, n: int) -> Tuple[Poly, ...]:
    """f_0..f_n with f_k = psi_k (k odd) or psi_k / psi_2 (k even)."""
    b2, b4, b6, b8 = curve.b2, curve.b4, curve.b6, curve.b8
    cubic = curve.two_division_cubic()
    cubic_sq = cubic ** 2
    f: Dict[int, Poly] = {
        0: Poly(0, X, domain='QQ'),
        1: Poly(1, X, domain='QQ'),
        2: Poly(1, X, domain='QQ'),
        3: Poly(3 * X ** 4 + b2 * X ** 3 + 3 * b4 * X ** 2 + 3 * b6 * X + b8, X, domain='QQ'),
        4: Poly(2 * X ** 6 + b2 * X ** 5 + 5 * b4 * X ** 4 + 10 * b6 * X ** 3 + 10 * b8 * X ** 2
                + (b2 * b8 - b4 * b6) * X + (b4 * b8 - b6 ** 2), X, domain='QQ'),
    }
    for k in range(5, n + 1):
        m = k // 2
        if k % 2 == 0:
            f[k] = f[m] * (f[m + 2] * f[m - 1] ** 2 - f[m - 2] * f[m + 1] ** 2)
        elif m % 2 == 0:
            f[k] = cubic_sq * f[m + 2] * f[m] ** 3 - f[m - 1] * f[m + 1] ** 3
        else:
            f[k] = f[m + 2] * f[m] ** 3 - cubic_sq * f[m - 1] * f[m + 1] ** 3
    return tuple(f[k] for k in range(n + 1))


def division_polynomial(curve: RationalCurve, n: int) -> XDivisionPoly:
    """
    The x-division polynomial of level n (2 <= n <= 12).

    Degree is (n^2 - 1)/2 for odd n and (n^2 + 2)/2 for even n.
    """
    if not 2 <= n <= 12:
        raise ValueError(f"Division polynomial level must be in 2..12, got {n}")
    f_n = _f_table(curve, max(n, 4))[n]
    if n % 2 == 0:
        f_n = curve.two_division_cubic() * f_n
    return XDivisionPoly(level=n, poly=f_n)


# ---------------------------------------------------------------------------
# Rational torsion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorsionSubgroup:
    structure: AbelianInvariants
    generators: Tuple[Point, ...]
    points: Tuple[Point, ...]

    @property
    def order(self) -> int:
        return len(self.points)

    def to_dataframe(self) -> pd.DataFrame:
        affine = [p for p in self.points if p is not None]
        return pd.DataFrame({'x': [str(p[0]) for p in affine],
                             'y': [str(p[1]) for p in affine]})


def _rational_sqrt(value: Rational) -> Optional[Rational]:
    if value < 0:
        return None
    num, num_exact = integer_nthroot(int(value.p), 2)
    den, den_exact = integer_nthroot(int(value.q), 2)
    return Rational(num, den) if num_exact and den_exact else None


def _points_over_x(curve: RationalCurve, x: Rational) -> List[Point]:
    # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    root = _rational_sqrt(curve.two_division_cubic().eval(x))
    if root is None:
        return []
    shift = curve.a1 * x + curve.a3
    ys = {(root - shift) / 2, (-root - shift) / 2}
    return [(x, y) for y in sorted(ys)]


def _point_key(p: Point):
    return (0,) if p is None else (1, p[0], p[1])


def rational_torsion(curve: RationalCurve) -> TorsionSubgroup:
    """
    E(Q)_tors with generators.

    Torsion orders over Q are at most 12, so every torsion point is a sum of
    points of order dividing 8, 9, 5 or 7; those are found from rational
    roots of the corresponding x-division polynomials.
    """
    candidates = set()
    for level in (8, 9, 5, 7):
        for x in division_polynomial(curve, level).rational_roots():
            candidates.update(_points_over_x(curve, x))

    group = {None}
    frontier = [None]
    while frontier:
        fresh = []
        for p in frontier:
            for q in candidates:
                s = add_points(curve, p, q)
                if s not in group:
                    group.add(s)
                    fresh.append(s)
        frontier = fresh

    points = sorted(group, key=_point_key)
    orders = {p: point_order(curve, p) for p in points}
    size = len(points)
    exponent = max(orders.values())
    generators: List[Point] = []
    if exponent > 1:
        generators.append(next(p for p in points if orders[p] == exponent))
    small = size // exponent
    if small > 1:
        spanned = {multiply_point(curve, generators[0], k) for k in range(exponent)}
        generators.append(next(p for p in points if orders[p] == small and p not in spanned))
    factors = tuple(f for f in (small, exponent) if f > 1)
    return TorsionSubgroup(structure=AbelianInvariants(factors), generators=tuple(generators),
                           points=tuple(points))
