"""
Parametrised families of curves and j-maps, and the CM exclusion scan.

Polynomial data is stored exactly as integer polynomials in t; curve
families are short models y^2 = x^3 + A(t) x + B(t), j-map families are
ratios of integer polynomials.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

import pandas as pd
from sympy import Poly, Rational, divisors, symbols

from .curve import RationalCurve
from .errors import PoleError, SingularCurveError

logger = logging.getLogger(__name__)

T = symbols('t')

# The 13 rational j-invariants of CM curves.
CM_J_INVARIANTS = (
    0, 54000, -12288000, 1728, 287496, -3375, 16581375, 8000, -32768,
    -884736, -884736000, -147197952000, -262537412640768000,
)

# Rational-root candidates tried before giving up.
DIVISOR_GUARD = 10 ** 6


class FamilyId(Enum):
    VERTICAL_2_4 = "vertical-2-4"
    HORIZONTAL_2_3 = "horizontal-2-3"
    ABELIAN_2_4 = "abelian-2-4"
    SPLIT_CARTAN_3 = "split-cartan-3"
    MOD4G_JLINE = "mod4g-jline"
    MOD4G_REFERENCE = "mod4g-reference"


@dataclass(frozen=True)
class Family:
    """
    Exact data of one family.

    Curve families set `a4` and `a6`; j-map families set `j_numerator` and
    `j_denominator`. A j-map family with `from_j` instantiates curves
    through the model y^2 + xy = x^3 - 36/(j-1728) x - 1/(j-1728).
    """

    family_id: FamilyId
    description: str
    a4: Optional[Poly] = None
    a6: Optional[Poly] = None
    j_numerator: Optional[Poly] = None
    j_denominator: Optional[Poly] = None
    from_j: bool = False

    @property
    def is_curve_family(self) -> bool:
        return self.a4 is not None

    def polynomials(self) -> Dict[str, Poly]:
        names = ('a4', 'a6', 'j_numerator', 'j_denominator')
        return {name: getattr(self, name) for name in names if getattr(self, name) is not None}


def _poly(expr) -> Poly:
    return Poly(expr, T, domain='ZZ')


_SPLIT_CARTAN_NUM = ((T ** 3 - 3 * T ** 2 - 9 * T - 9) * (T ** 3 + 3 * T ** 2 + 3 * T - 3)
                     * (T ** 6 + 12 * T ** 5 + 81 * T ** 4 + 216 * T ** 3 + 243 * T ** 2
                        + 108 * T + 27))
_SPLIT_CARTAN_DEN = (T * (T + 1) ** 2 * (T + 3) ** 2 * (T ** 2 + 3) ** 2
                     * (T ** 2 + 3 * T + 3))

_MOD4G_NUM = (-4 * T ** 8 + 32 * T ** 7 + 80 * T ** 6 - 288 * T ** 5 - 504 * T ** 4
              + 864 * T ** 3 + 1296 * T ** 2 - 864 * T - 1188)
_MOD4G_DEN = T ** 4 + 4 * T ** 3 + 6 * T ** 2 + 4 * T + 1

FAMILIES: Dict[FamilyId, Family] = {
    FamilyId.VERTICAL_2_4: Family(
        FamilyId.VERTICAL_2_4,
        "Q(E[2]) = Q(E[4]) for non-CM curves (2-adic levels 2 and 4)",
        a4=_poly(-27 * T ** 8 + 648 * T ** 7 - 4212 * T ** 6 - 2376 * T ** 5 + 60102 * T ** 4
                 + 79704 * T ** 3 - 105732 * T ** 2 - 235224 * T - 107811),
        a6=_poly(54 * T ** 12 - 1944 * T ** 11 + 24300 * T ** 10 - 97848 * T ** 9
                 - 251262 * T ** 8 + 1722384 * T ** 7 + 4821768 * T ** 6 - 8697456 * T ** 5
                 - 64323558 * T ** 4 - 140447736 * T ** 3 - 157012020 * T ** 2
                 - 90561240 * T - 21346578),
    ),
    FamilyId.HORIZONTAL_2_3: Family(
        FamilyId.HORIZONTAL_2_3,
        "Q(E[2]) = Q(E[3]) (up to the twist by -3)",
        a4=_poly(-3 * T ** 9 * (T ** 3 - 2) * (T ** 3 + 2) ** 3 * (T ** 3 + 4)),
        a6=_poly(-2 * T ** 12 * (T ** 3 + 2) ** 4 * (T ** 4 - 2 * T ** 3 + 4 * T - 2)
                 * (T ** 8 + 2 * T ** 7 + 4 * T ** 6 + 8 * T ** 5 + 10 * T ** 4 + 8 * T ** 3
                    + 16 * T ** 2 + 8 * T + 4)),
    ),
    FamilyId.ABELIAN_2_4: Family(
        FamilyId.ABELIAN_2_4,
        "abelian Q(E[2]) = Q(E[4]) = Q(i)",
        a4=_poly(-432 * T ** 8 + 1512 * T ** 4 - 27),
        a6=_poly(3456 * T ** 12 + 28512 * T ** 8 - 7128 * T ** 4 - 54),
    ),
    FamilyId.SPLIT_CARTAN_3: Family(
        FamilyId.SPLIT_CARTAN_3,
        "j-map for Q(E[2]) strictly inside Q(E[3]) = Q(E[6]) (after a twist)",
        j_numerator=_poly(-_SPLIT_CARTAN_NUM ** 3),
        j_denominator=_poly(_SPLIT_CARTAN_DEN ** 3),
        from_j=True,
    ),
    FamilyId.MOD4G_JLINE: Family(
        FamilyId.MOD4G_JLINE,
        "j-map of the modular curve of the mod-4 group Mod4G",
        j_numerator=_poly(_MOD4G_NUM),
        j_denominator=_poly(_MOD4G_DEN),
    ),
    FamilyId.MOD4G_REFERENCE: Family(
        FamilyId.MOD4G_REFERENCE,
        "curves with j = j_G(t) through the standard model of given j",
        j_numerator=_poly(_MOD4G_NUM),
        j_denominator=_poly(_MOD4G_DEN),
        from_j=True,
    ),
}


def get_family(family_id) -> Family:
    """Look up a family by FamilyId or its text value."""
    if isinstance(family_id, Family):
        return family_id
    if not isinstance(family_id, FamilyId):
        try:
            family_id = FamilyId(family_id)
        except ValueError:
            valid = ", ".join(f.value for f in FamilyId)
            raise ValueError(f"Unknown family '{family_id}' (expected one of {valid})") from None
    return FAMILIES[family_id]


def curve_with_j(j: Rational) -> RationalCurve:
    """
    y^2 + xy = x^3 - 36/(j-1728) x - 1/(j-1728), a curve with invariant j.

    Raises:
        SingularCurveError: For j in {0, 1728}
    """
    j = Rational(j)
    if j in (0, 1728):
        raise SingularCurveError(f"The standard model of given j is singular at j = {j}")
    return RationalCurve(1, 0, 0, Rational(-36) / (j - 1728), Rational(-1) / (j - 1728))


def _j_map(family: Family, t: Rational) -> Rational:
    denominator = family.j_denominator.eval(t)
    if denominator == 0:
        raise PoleError(f"{family.family_id.value}: j-map has a pole at t = {t}")
    return Rational(family.j_numerator.eval(t)) / Rational(denominator)


def instantiate(family_id, t) -> RationalCurve:
    """
    The member of a family at parameter t.

    Raises:
        SingularCurveError: If the instantiated model is singular
        PoleError: If a j-map family has a pole at t
    """
    family = get_family(family_id)
    t = Rational(t)
    if family.is_curve_family:
        a, b = family.a4.eval(t), family.a6.eval(t)
        try:
            return RationalCurve(0, 0, 0, a, b)
        except SingularCurveError:
            raise SingularCurveError(f"{family.family_id.value} is singular at t = {t}") from None
    if not family.from_j:
        raise ValueError(f"{family.family_id.value} is a j-map only; use j_value")
    try:
        return curve_with_j(_j_map(family, t))
    except SingularCurveError:
        raise SingularCurveError(f"{family.family_id.value} is singular at t = {t}") from None


def j_value(family_id, t) -> Rational:
    """
    Exact j-invariant of the family member at t.

    Raises:
        PoleError: At a pole of the j-map
    """
    family = get_family(family_id)
    t = Rational(t)
    if family.is_curve_family:
        return instantiate(family, t).j_invariant
    return _j_map(family, t)


def rational_roots(coeffs: Sequence[int]) -> List[Rational]:
    """
    Rational roots of an integer polynomial (highest degree first).

    Candidates p/q come from the rational-root theorem and are checked with
    the homogenised integer evaluation sum c_i p^(d-i) q^i.
    """
    coeffs = [int(c) for c in coeffs]
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    if not coeffs:
        raise ValueError("The zero polynomial has every number as a root")
    roots = set()
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
        roots.add(Rational(0))
    if len(coeffs) == 1:
        return sorted(roots)
    leading, constant = abs(coeffs[0]), abs(coeffs[-1])
    numerators, denominators = divisors(constant), divisors(leading)
    if 2 * len(numerators) * len(denominators) > DIVISOR_GUARD:
        raise ValueError(f"Too many rational-root candidates "
                         f"({len(numerators)} x {len(denominators)})")
    degree = len(coeffs) - 1
    for p in numerators:
        for q in denominators:
            for signed in (p, -p):
                total = sum(c * signed ** (degree - i) * q ** i for i, c in enumerate(coeffs))
                if total == 0:
                    roots.add(Rational(signed, q))
    return sorted(roots)


@dataclass
class CMExclusionEntry:
    j0: Rational
    roots: List[Rational]
    control: bool = False

    @property
    def excluded(self) -> bool:
        return not self.roots


@dataclass
class CMExclusionReport:
    family_id: FamilyId
    entries: List[CMExclusionEntry] = field(default_factory=list)

    @property
    def all_excluded(self) -> bool:
        return all(e.excluded for e in self.entries if not e.control)

    @property
    def control_found(self) -> bool:
        controls = [e for e in self.entries if e.control]
        return all(not e.excluded for e in controls)

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({
            'j0': [str(e.j0) for e in self.entries],
            'control': [e.control for e in self.entries],
            'rational_roots': [", ".join(str(r) for r in e.roots) for e in self.entries],
            'excluded': [e.excluded for e in self.entries],
        })


def j_preimages(family_id, j0) -> List[Rational]:
    """Rational t (not poles) with j(t) = j0 for a j-map family."""
    family = get_family(family_id)
    if family.j_numerator is None:
        raise ValueError(f"{family.family_id.value} has no j-map")
    j0 = Rational(j0)
    equation = family.j_numerator * int(j0.q) - family.j_denominator * int(j0.p)
    return [t for t in rational_roots(equation.all_coeffs())
            if family.j_denominator.eval(t) != 0]


def cm_exclusion_scan(family_id=FamilyId.MOD4G_JLINE,
                      j_values: Sequence = CM_J_INVARIANTS,
                      control_t: Optional[Rational] = Rational(1),
                      jobs: int = 1) -> CMExclusionReport:
    """
    Show that no rational t has j(t) equal to a CM j-invariant.

    Args:
        family_id: A j-map family
        j_values: Values to exclude
        control_t: If given, j(control_t) is added as a control that must
            have a rational preimage
        jobs: Worker threads (one task per value)
    """
    family = get_family(family_id)
    tasks = [(Rational(j), False) for j in j_values]
    if control_t is not None:
        tasks.append((j_value(family, control_t), True))

    def run(task):
        j0, control = task
        return CMExclusionEntry(j0=j0, roots=j_preimages(family, j0), control=control)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            entries = list(executor.map(run, tasks))
    else:
        entries = [run(task) for task in tasks]
    for entry in entries:
        if not entry.control and not entry.excluded:
            logger.warning(f"j0 = {entry.j0} has rational preimages {entry.roots}")
    return CMExclusionReport(family_id=family.family_id, entries=entries)
