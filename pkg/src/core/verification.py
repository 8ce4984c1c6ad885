"""
Verification routines, one per computational claim.

Every routine returns a VerificationReport; a failed report always carries a
concrete counterexample (an element, a subgroup, a pair of levels or a
prime). Exhaustive checks walk all of GL(2, Z/p^nZ); group searches run on
the subgroup enumeration and share its memo and disk cache.
"""

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sympy import factorint, isprime, primerange

from .curve import DEFAULT_SEED, RationalCurve
from .enumeration import SubgroupFilter, enumerate_subgroups
from .errors import EnumerationCeilingError, ModulusError
from .families import cm_exclusion_scan
from .groups import (AbelianInvariants, Subgroup, abelian_invariants, are_conjugate,
                     are_isomorphic, decode, extend_subgroup, full_group, generate_subgroup,
                     identity_code, invert, is_conjugate_into, multiply, order_histogram,
                     power, preimage, projective_order_histogram, reduce_codes,
                     traces_and_dets)
from .menagerie import (S4_ORDER_HISTOGRAM, GroupClass, NamedGroupId, cc_witness,
                        classify_subgroup, has_cc_element, is_admissible, mod12_pi4_image,
                        named_group)
from .modring import GL2Element, element_order, gl2_order, modulus_ceiling
from .probe import (DEFAULT_BOUND, WITNESS_THRESHOLD, Verdict, coincide_heuristic,
                    coincidence_obstruction, cyclotomic_bound, cyclotomic_containment,
                    probe_image, split_residue_subgroup)

if TYPE_CHECKING:
    from ..utils.group_data import GroupFile

logger = logging.getLogger(__name__)

# Largest GL(2, Z/NZ) (in elements) walked element by element.
EXHAUSTION_CEILING = 10 ** 6

# Pairs of prime powers whose division fields can coincide.
PRIME_POWER_COINCIDENCES = frozenset({(2, 3), (2, 4)})

# Pairs 2 <= m < n <= 10 that no stage of scan_pairs rules out.
EXPECTED_PAIRS = frozenset({(2, 3), (2, 4), (2, 6), (3, 6), (4, 6), (6, 8), (6, 9), (5, 10)})

# Prime levels from here on are settled against an external list of images.
EXTERNAL_PRIME_FLOOR = 7

# Facts taken as given, not recomputed, behind the exclusion of a pair (or of
# part of it).
PAIR_EXTERNAL_FACTS = {
    (3, 4): ("the modular curves of the mod-12 groups H1, H2 have genus 9, so the "
             "exclusion goes through their overgroup Htilde",
             "144a1 (y^2 = x^3 - 1) has rank 0 with rational points O and (1, 0) only"),
    (4, 6): ("Q(E[12]) is never abelian, so an abelian Q(E[4]) = Q(E[6]) is excluded",),
}

MOD9_ABELIANIZATIONS = frozenset(AbelianInvariants(f) for f in ((6,), (2, 6), (3, 6), (6, 6)))
MOD4_ABELIANIZATIONS = frozenset(AbelianInvariants(f) for f in
                                 ((2,), (2, 2), (2, 2, 2), (2, 4), (6,), (2, 6)))
SHARED_ABELIANIZATION = AbelianInvariants((2, 6))

D4_ORDER_HISTOGRAM = {1: 1, 2: 5, 4: 2}

# Coincidence levels expected on the bundled 2-adic sample.
RZB_SAMPLE_EXPECTED = {
    'Mod4G': [1],
    'Mod4H': [1],
    'Curve32a3Level(5)': [],
    'GL(2,Z/2)': [],
}

CURVES = {
    '40a4': "0,0,0,13,-34",
    '32a3': "0,0,0,-11,-14",
    '486d2': "0,0,0,405,-9882",
    '162d1': "1,-1,1,4,-1",
    '405d1': "1,-1,1,-2,-26",
    '18176r2': "0,-1,0,-4319,100435",
}
COINCIDENCE_EXAMPLES = (('40a4', 2, 4), ('486d2', 2, 3), ('486d2', 3, 6), ('162d1', 2, 4))
CONTAINMENT_EXAMPLES = (('32a3', 4, 8, None), ('32a3', 8, 16, None), ('405d1', 7, 9, (7, 1)))


@dataclass
class VerificationReport:
    """
    Outcome of one claim check.

    Attributes:
        claim: Claim id (see CLAIMS)
        parameters: Arguments the check ran with
        passed: True on pass
        counterexample: Concrete witness of the failure (None on pass)
        details: Supporting data (counts, witnesses, tables)
        elapsed: Wall-clock seconds
    """

    claim: str
    parameters: Dict[str, Any]
    passed: bool
    counterexample: Optional[Dict[str, Any]] = None
    details: Dict[str, Any] = field(default_factory=dict)
    elapsed: float = 0.0

    def __post_init__(self):
        if not self.passed and self.counterexample is None:
            raise ValueError(f"Failed report for {self.claim} has no counterexample")

    @property
    def verdict(self) -> str:
        return Verdict.PASS.value if self.passed else Verdict.FAIL.value

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        payload = {
            'claim': self.claim,
            'parameters': dict(self.parameters),
            'verdict': self.verdict,
            'counterexample': self.counterexample,
            'details': self.details,
        }
        if include_timing:
            payload['elapsed'] = round(self.elapsed, 3)
        return payload


def _finish(claim: str, parameters: Dict[str, Any], started: float,
            counterexample: Optional[Dict[str, Any]] = None,
            details: Optional[Dict[str, Any]] = None) -> VerificationReport:
    report = VerificationReport(claim=claim, parameters=parameters,
                                passed=counterexample is None,
                                counterexample=counterexample, details=details or {},
                                elapsed=time.perf_counter() - started)
    if report.passed:
        logger.info(f"{claim} {parameters}: pass ({report.elapsed:.2f}s)")
    else:
        logger.warning(f"{claim} {parameters}: FAIL, counterexample {counterexample}")
    return report


def _require_prime(p: int, odd: bool = False) -> int:
    p = int(p)
    if not isprime(p) or (odd and p == 2):
        raise ValueError(f"{p} is not an {'odd ' if odd else ''}prime")
    return p


def _require_exponent(n: int) -> int:
    n = int(n)
    if n < 1:
        raise ValueError(f"Level exponent must be positive, got {n}")
    return n


def _exhaustible_group(modulus: int) -> Subgroup:
    order = gl2_order(modulus)
    if order > EXHAUSTION_CEILING:
        raise EnumerationCeilingError(
            f"GL(2,Z/{modulus}) has {order} elements: exhaustion ceiling is "
            f"{EXHAUSTION_CEILING}", EXHAUSTION_CEILING)
    return full_group(modulus)


def _element(code, modulus: int) -> str:
    return str(GL2Element.from_code(int(code), modulus))


def _describe(group: Subgroup) -> Dict[str, Any]:
    return {
        'label': group.label,
        'modulus': group.modulus,
        'order': group.order,
        'generators': [str(g) for g in group.small_generators],
    }


def _invariant_lists(invariants: Iterable[AbelianInvariants]) -> List[List[int]]:
    return [inv.as_list() for inv in sorted(invariants, key=lambda i: (i.order, i.factors))]


def _reduced_codes(group: Subgroup, modulus: int) -> np.ndarray:
    return np.unique(reduce_codes(group.codes, group.modulus, modulus))


# ---------------------------------------------------------------------------
# Exhaustive element checks
# ---------------------------------------------------------------------------

def verify_max_ppower_order(p: int, n: int) -> VerificationReport:
    """
    Elements of p-power order in GL(2, Z/p^nZ) have order at most p^n, and
    every p^k with 1 <= k <= n occurs, witnessed by (1, p^(n-k); 0, 1).

    Raises:
        EnumerationCeilingError: If the group exceeds EXHAUSTION_CEILING
    """
    started = time.perf_counter()
    p, n = _require_prime(p), _require_exponent(n)
    parameters = {'p': p, 'n': n}
    modulus = p ** n
    group = _exhaustible_group(modulus)
    ident = identity_code(modulus)

    p_part = p ** factorint(group.order).get(p, 0)
    p_elements = group.codes[power(group.codes, p_part, modulus) == ident]
    offenders = p_elements[power(p_elements, modulus, modulus) != ident]
    details: Dict[str, Any] = {'modulus': modulus, 'group_order': group.order,
                               'p_power_elements': int(p_elements.size)}
    if offenders.size:
        g = GL2Element.from_code(int(offenders[0]), modulus)
        return _finish('max-ppower-order', parameters, started,
                       {'element': str(g), 'order': element_order(g), 'bound': modulus}, details)

    witnesses = {}
    for k in range(1, n + 1):
        w = GL2Element(modulus, 1, p ** (n - k), 0, 1)
        order = element_order(w)
        if order != p ** k:
            return _finish('max-ppower-order', parameters, started,
                           {'element': str(w), 'order': order, 'expected': p ** k}, details)
        witnesses[str(p ** k)] = str(w)
    details['witnesses'] = witnesses
    return _finish('max-ppower-order', parameters, started, details=details)


def verify_kernel_order(p: int, n: int) -> VerificationReport:
    """Elements of ker(GL(2, Z/p^n) -> GL(2, Z/p)) have order dividing p^(n-1)."""
    started = time.perf_counter()
    p, n = _require_prime(p), _require_exponent(n)
    parameters = {'p': p, 'n': n}
    modulus = p ** n
    group = _exhaustible_group(modulus)

    kernel = group.codes[reduce_codes(group.codes, modulus, p) == identity_code(p)]
    details = {'modulus': modulus, 'kernel_size': int(kernel.size)}
    expected_size = p ** (4 * (n - 1))
    if kernel.size != expected_size:
        return _finish('kernel-order', parameters, started,
                       {'kernel_size': int(kernel.size), 'expected': expected_size}, details)
    offenders = kernel[power(kernel, p ** (n - 1), modulus) != identity_code(modulus)]
    if offenders.size:
        g = GL2Element.from_code(int(offenders[0]), modulus)
        return _finish('kernel-order', parameters, started,
                       {'element': str(g), 'order': element_order(g)}, details)
    return _finish('kernel-order', parameters, started, details=details)


def verify_det_square(p: int, n: int) -> VerificationReport:
    """
    An element of GL(2, Z/p^nZ) whose order is divisible by p^n(p - 1) has a
    determinant that is a square mod p.
    """
    started = time.perf_counter()
    p, n = _require_prime(p, odd=True), _require_exponent(n)
    parameters = {'p': p, 'n': n}
    modulus = p ** n
    group = _exhaustible_group(modulus)

    target = p ** n * (p - 1)
    selected = group.codes[group.element_orders % target == 0]
    _, dets = traces_and_dets(selected, modulus)
    squares = np.array(sorted({(x * x) % p for x in range(1, p)}), dtype=np.int64)
    bad = ~np.isin(dets % p, squares)
    details = {'modulus': modulus, 'order_multiple': target, 'checked': int(selected.size)}
    if bad.any():
        index = int(np.flatnonzero(bad)[0])
        return _finish('det-square', parameters, started,
                       {'element': _element(selected[index], modulus),
                        'det': int(dets[index])}, details)
    return _finish('det-square', parameters, started, details=details)


# ---------------------------------------------------------------------------
# Mod-p structure
# ---------------------------------------------------------------------------

def verify_split_cartan_structure(p: int, jobs: int = 1, cache_dir=None) -> VerificationReport:
    """
    Abelianisations of det-surjective non-abelian subgroups of N_s(p).

    Allowed: (Z/p)^x, (Z/p)^x x Z/2 and Z/2(p-1); the last one never occurs
    once the group holds an element of trace 0 and determinant -1.
    """
    started = time.perf_counter()
    p = _require_prime(p, odd=True)
    parameters = {'p': p}
    container = named_group(NamedGroupId('SplitCartanNormalizer', (p,)))
    groups = enumerate_subgroups(p, SubgroupFilter(det_surjective=True, non_abelian=True,
                                                   container=container),
                                 jobs=jobs, cache_dir=cache_dir)
    cyclic = AbelianInvariants.from_orders([p - 1])
    doubled = AbelianInvariants.from_orders([p - 1, 2])
    long_cyclic = AbelianInvariants.from_orders([2 * (p - 1)])
    allowed = {cyclic, doubled, long_cyclic}

    found: Dict[str, int] = {}
    for group in groups:
        invariants = abelian_invariants(group)
        cc = has_cc_element(group)
        key = f"{invariants}{' (cc)' if cc else ''}"
        found[key] = found.get(key, 0) + 1
        if invariants not in allowed or (cc and invariants == long_cyclic):
            return _finish('split-cartan', parameters, started,
                           {'subgroup': _describe(group), 'abelianization': invariants.as_list(),
                            'cc_element': cc},
                           {'groups_checked': len(groups)})
    return _finish('split-cartan', parameters, started,
                   details={'groups_checked': len(groups), 'abelianizations': found})


def _nonsplit_failure(group: Subgroup, cartan: Subgroup,
                      expected: AbelianInvariants) -> Optional[Dict[str, Any]]:
    """First violated structure fact for a subgroup of N_ns(p), or None."""
    p = group.modulus
    invariants = abelian_invariants(group)
    if invariants != expected:
        return {'subgroup': _describe(group), 'abelianization': invariants.as_list(),
                'expected': expected.as_list()}

    inside = cartan.contains_codes(group.codes)
    h = Subgroup(p, group.codes[inside])
    if group.order != 2 * h.order:
        return {'subgroup': _describe(group), 'reason': f"|G| = {group.order} but "
                f"|G meet C_ns| = {h.order}"}
    tau = int(group.codes[~inside][0])
    if extend_subgroup(h, [GL2Element.from_code(tau, p)]).order != group.order:
        return {'subgroup': _describe(group), 'element': _element(tau, p),
                'reason': "G is not generated by G meet C_ns and tau"}

    square = int(multiply(tau, tau, p))
    a, b, c, d = (int(v) for v in decode(square, p))
    if not (h.contains_codes([square])[0] and b == 0 and c == 0 and a == d):
        return {'subgroup': _describe(group), 'element': _element(tau, p),
                'reason': "tau^2 is not a scalar in G meet C_ns"}

    conjugated = multiply(multiply(tau, h.codes, p), invert(tau, p), p)
    bad = np.flatnonzero(conjugated != power(h.codes, p, p))
    if bad.size:
        return {'subgroup': _describe(group), 'element': _element(h.codes[bad[0]], p),
                'reason': "tau h tau^-1 differs from h^p"}

    witness = cc_witness(group)
    if witness is not None and witness in cartan:
        return {'subgroup': _describe(group), 'element': str(witness),
                'reason': "trace-0, det -1 element lies in C_ns"}
    return None


def verify_nonsplit_structure(p: int, jobs: int = 1, cache_dir=None) -> VerificationReport:
    """
    Subgroups G of N_ns(p) with surjective determinant, an element of trace 0
    and determinant -1 and G' != 1 have G/G' = Z/2 x (Z/p)^x, |G| = 2|H| for
    H = G meet C_ns(p), and any tau outside H squares to a scalar and acts on
    H by h -> h^p.
    """
    started = time.perf_counter()
    p = _require_prime(p, odd=True)
    parameters = {'p': p}
    cartan = named_group(NamedGroupId('NonsplitCartan', (p,)))
    container = named_group(NamedGroupId('NonsplitCartanNormalizer', (p,)))
    groups = enumerate_subgroups(p, SubgroupFilter(det_surjective=True, cc_element=True,
                                                   non_abelian=True, container=container),
                                 jobs=jobs, cache_dir=cache_dir)
    expected = AbelianInvariants.from_orders([2, p - 1])
    for group in groups:
        failure = _nonsplit_failure(group, cartan, expected)
        if failure is not None:
            return _finish('nonsplit-cartan', parameters, started, failure,
                           {'groups_checked': len(groups)})
    return _finish('nonsplit-cartan', parameters, started,
                   details={'groups_checked': len(groups), 'abelianization': expected.as_list(),
                            'orders': sorted(g.order for g in groups)})


def verify_exceptional() -> VerificationReport:
    """H5 and H13: abelianisations Z/4 and Z/12, projective image S4."""
    started = time.perf_counter()
    details: Dict[str, Any] = {}
    for name, factors in (('H5', [4]), ('H13', [12])):
        group = named_group(NamedGroupId(name))
        invariants = abelian_invariants(group)
        projective, histogram = projective_order_histogram(group)
        classification = classify_subgroup(group)
        details[name] = {'order': group.order, 'abelianization': invariants.as_list(),
                         'projective_order': projective,
                         'projective_histogram': {str(k): v for k, v in histogram.items()},
                         'class': classification.value}
        if invariants.as_list() != factors:
            return _finish('exceptional', {}, started,
                           {'subgroup': _describe(group), 'abelianization': invariants.as_list(),
                            'expected': factors}, details)
        if projective != 24 or histogram != S4_ORDER_HISTOGRAM:
            return _finish('exceptional', {}, started,
                           {'subgroup': _describe(group), 'projective_order': projective,
                            'reason': "projective image is not S4"}, details)
        if classification is not GroupClass.EXCEPTIONAL:
            return _finish('exceptional', {}, started,
                           {'subgroup': _describe(group), 'class': classification.value}, details)
    return _finish('exceptional', {}, started, details=details)


# ---------------------------------------------------------------------------
# Group searches
# ---------------------------------------------------------------------------

def verify_mod9_mod4_exclusion(jobs: int = 1, cache_dir=None) -> VerificationReport:
    """
    No curve has Q(E[4]) = Q(E[9]) with a non-abelian image.

    Reproduces the abelianisation sets of admissible non-abelian subgroups
    mod 9 and mod 4, locates the groups with abelianisation Z/2 x Z/6 (the
    only one compatible with Q(i, zeta_9)) inside the lifts of Cns(2), B(3)
    and N_ns(3), and checks that no mod-4 group of that kind is isomorphic
    to a mod-9 one.
    """
    started = time.perf_counter()
    admissible = SubgroupFilter.admissible(non_abelian=True)
    mod9 = enumerate_subgroups(9, admissible, jobs=jobs, cache_dir=cache_dir)
    mod4 = enumerate_subgroups(4, admissible, jobs=jobs, cache_dir=cache_dir)
    found9 = {abelian_invariants(g) for g in mod9}
    found4 = {abelian_invariants(g) for g in mod4}
    details: Dict[str, Any] = {
        'mod9_groups': len(mod9), 'mod4_groups': len(mod4),
        'mod9_abelianizations': _invariant_lists(found9),
        'mod4_abelianizations': _invariant_lists(found4),
    }
    for level, found, expected in ((9, found9, MOD9_ABELIANIZATIONS),
                                   (4, found4, MOD4_ABELIANIZATIONS)):
        if found != expected:
            return _finish('mod9-mod4', {}, started,
                           {'level': level, 'found': _invariant_lists(found),
                            'expected': _invariant_lists(expected)}, details)

    shared4 = [g for g in mod4 if abelian_invariants(g) == SHARED_ABELIANIZATION]
    shared9 = [g for g in mod9 if abelian_invariants(g) == SHARED_ABELIANIZATION]
    details['shared_mod4'] = len(shared4)
    details['shared_mod9'] = len(shared9)

    cns_lift = preimage(named_group(NamedGroupId('Cns2')), 4)
    for group in shared4:
        if is_conjugate_into(group, cns_lift) is None:
            return _finish('mod9-mod4', {}, started,
                           {'subgroup': _describe(group),
                            'reason': "not conjugate into the lift of Cns2"}, details)
    lifts9 = [preimage(named_group(NamedGroupId(name)), 9) for name in ('B3', 'Nns3')]
    for group in shared9:
        if all(is_conjugate_into(group, lift) is None for lift in lifts9):
            return _finish('mod9-mod4', {}, started,
                           {'subgroup': _describe(group),
                            'reason': "not conjugate into the lift of B3 or Nns3"}, details)

    for g4 in shared4:
        for g9 in shared9:
            if g4.order == g9.order and are_isomorphic(g4, g9):
                return _finish('mod9-mod4', {}, started,
                               {'subgroups': [_describe(g4), _describe(g9)],
                                'reason': "isomorphic admissible images"}, details)
    return _finish('mod9-mod4', {}, started, details=details)


def abelian_reference_table() -> Dict[int, List[AbelianInvariants]]:
    """
    Levels n with a possibly abelian Q(E[n]) and the groups its Galois group
    can be, as invariant factors.
    """
    raw = {
        2: [(), (2,), (3,)],
        3: [(2,), (2, 2)],
        4: [(2,), (2, 2), (2, 2, 2), (2, 2, 2, 2)],
        5: [(4,), (2, 4), (4, 4)],
        6: [(2, 2), (2, 2, 2)],
        8: [(2, 2, 2, 2), (2, 2, 2, 2, 2), (2, 2, 2, 2, 2, 2)],
    }
    return {n: [AbelianInvariants(f) for f in groups] for n, groups in raw.items()}


def verify_abelian_table(jobs: int = 1, cache_dir=None) -> VerificationReport:
    """Every tabulated group is the structure of an abelian admissible subgroup mod n."""
    started = time.perf_counter()
    details: Dict[str, Any] = {}
    for n, listed in sorted(abelian_reference_table().items()):
        groups = enumerate_subgroups(n, SubgroupFilter.admissible(), jobs=jobs, cache_dir=cache_dir)
        occurring = {abelian_invariants(g) for g in groups if g.is_abelian()}
        details[str(n)] = _invariant_lists(occurring)
        missing = [inv for inv in listed if inv not in occurring]
        if missing:
            return _finish('abelian-table', {}, started,
                           {'level': n, 'group': missing[0].as_list(),
                            'reason': "no abelian admissible subgroup with this structure"},
                           details)
    return _finish('abelian-table', {}, started, details=details)


@dataclass
class PairOutcome:
    """
    Decision of scan_pairs for one pair of levels.

    `stage` names the argument that settled the pair: prime-power,
    isomorphism, abelian, external, or open when nothing applied.
    """

    m: int
    n: int
    excluded: bool
    stage: str
    matches: int = 0
    external_data_required: bool = False
    external_facts: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {'m': self.m, 'n': self.n, 'excluded': self.excluded, 'stage': self.stage,
                'matches': self.matches,
                'external_data_required': self.external_data_required,
                'external_facts': list(self.external_facts)}


def _is_prime_power(value: int) -> bool:
    return len(factorint(value)) == 1


def _matched_pairs(small: List[Subgroup], large: List[Subgroup]) -> List[Tuple[Subgroup, Subgroup]]:
    by_order: Dict[int, List[Subgroup]] = {}
    for group in large:
        by_order.setdefault(group.order, []).append(group)
    return [(a, b) for a in small for b in by_order.get(a.order, []) if are_isomorphic(a, b)]


def _external_decision(matched: List[Subgroup], known_images: Optional[List[Subgroup]]) -> Tuple[bool, bool]:
    """(excluded, external data required) for a prime level settled by a list of images."""
    if known_images is None:
        return False, True
    for group in matched:
        if any(are_conjugate(group, image)[0] for image in known_images
               if image.order == group.order):
            return False, False
    return True, False


def pair_outcomes(max_level: int = 10, mod7_exclusions: Optional['GroupFile'] = None,
                  jobs: int = 1, cache_dir=None) -> List[PairOutcome]:
    """
    Decide every pair 2 <= m < n <= max_level.

    Stages, in order: prime-power pairs other than (2,3) and (2,4) are
    excluded; pairs without an isomorphic pair of admissible images are
    excluded; pairs whose matches are all abelian are excluded when a level
    admits no abelian division field; pairs involving a prime level >= 7 are
    checked against `mod7_exclusions`, the list of mod-7 images known to
    occur, and flagged when it is missing.
    """
    known_images = None
    if mod7_exclusions is not None:
        if mod7_exclusions.modulus != EXTERNAL_PRIME_FLOOR:
            raise ModulusError(f"mod-7 image data is mod {mod7_exclusions.modulus}")
        if mod7_exclusions.header.get('partial'):
            logger.warning("mod-7 image list is partial: exclusions based on it are provisional")
        known_images = mod7_exclusions.subgroups()
    abelian_levels = set(abelian_reference_table())
    admissible: Dict[int, List[Subgroup]] = {}

    def images(level: int) -> List[Subgroup]:
        if level not in admissible:
            admissible[level] = enumerate_subgroups(level, SubgroupFilter.admissible(),
                                                    jobs=jobs, cache_dir=cache_dir)
        return admissible[level]

    outcomes = []
    for n in range(3, max_level + 1):
        for m in range(2, n):
            facts = list(PAIR_EXTERNAL_FACTS.get((m, n), ()))
            if _is_prime_power(m) and _is_prime_power(n):
                allowed = (m, n) in PRIME_POWER_COINCIDENCES
                outcomes.append(PairOutcome(m, n, excluded=not allowed, stage='prime-power',
                                            external_facts=facts))
                continue
            matches = _matched_pairs(images(m), images(n))
            outcome = PairOutcome(m, n, excluded=False, stage='open', matches=len(matches),
                                  external_facts=facts)
            if not matches:
                outcome.excluded, outcome.stage = True, 'isomorphism'
            elif (all(a.is_abelian() for a, _ in matches)
                  and not {m, n} <= abelian_levels):
                outcome.excluded, outcome.stage = True, 'abelian'
            else:
                external = [(side, k) for side, k in enumerate((m, n))
                            if isprime(k) and k >= EXTERNAL_PRIME_FLOOR]
                if external:
                    side, level = external[0]
                    data = known_images if level == EXTERNAL_PRIME_FLOOR else None
                    outcome.stage = 'external'
                    outcome.excluded, outcome.external_data_required = _external_decision(
                        [pair[side] for pair in matches], data)
            logger.info(f"Pair ({m},{n}): {outcome.stage}, "
                        f"{'excluded' if outcome.excluded else 'not excluded'}")
            outcomes.append(outcome)
    return outcomes


def scan_pairs(max_level: int = 10, mod7_exclusions: Optional['GroupFile'] = None,
               jobs: int = 1, cache_dir=None) -> VerificationReport:
    """
    Pairs (m, n) with Q(E[m]) = Q(E[n]) not ruled out by group theory.

    Passes when the surviving pairs are exactly the expected ones up to
    max_level. Without mod-7 image data (6,7) cannot be decided and is
    expected as a flagged survivor; with data it must be excluded. Pairs
    excluded by a list marked partial are reported as provisional.
    """
    started = time.perf_counter()
    if not 3 <= max_level <= 10:
        raise ValueError(f"max_level must lie in [3, 10], got {max_level}")
    if mod7_exclusions is None:
        mod7_data = 'absent'
    else:
        mod7_data = 'partial' if mod7_exclusions.header.get('partial') else 'complete'
    parameters = {'max_level': max_level, 'mod7_data': mod7_data}
    outcomes = pair_outcomes(max_level, mod7_exclusions, jobs=jobs, cache_dir=cache_dir)
    surviving = {(o.m, o.n) for o in outcomes if not o.excluded}
    flagged = sorted((o.m, o.n) for o in outcomes if o.external_data_required)

    expected = {pair for pair in EXPECTED_PAIRS if pair[1] <= max_level}
    if mod7_exclusions is None and max_level >= EXTERNAL_PRIME_FLOOR:
        expected.add((6, EXTERNAL_PRIME_FLOOR))
    provisional = []
    if mod7_data == 'partial':
        provisional = sorted((o.m, o.n) for o in outcomes if o.stage == 'external' and o.excluded)
    details = {
        'pairs': {f"{o.m},{o.n}": o.to_dict() for o in outcomes},
        'not_excluded': [list(p) for p in sorted(surviving)],
        'external_data_required': [list(p) for p in flagged],
        'mod7_data': mod7_data,
        'provisional': [list(p) for p in provisional],
        'external_facts': {f"{o.m},{o.n}": list(o.external_facts)
                           for o in outcomes if o.external_facts},
    }
    if surviving != expected:
        return _finish('pairs', parameters, started,
                       {'unexpected': [list(p) for p in sorted(surviving - expected)],
                        'missing': [list(p) for p in sorted(expected - surviving)]}, details)
    return _finish('pairs', parameters, started, details=details)


def pairs_to_dataframe(outcomes: Sequence[PairOutcome]) -> pd.DataFrame:
    return pd.DataFrame([o.to_dict() for o in outcomes])


# ---------------------------------------------------------------------------
# 2-adic checks
# ---------------------------------------------------------------------------

def verify_32a3(levels: Sequence[int] = (2, 3, 4, 5, 6)) -> VerificationReport:
    """
    The 2-adic image <A, B, C> of 32a3 mod 2^n: relations, order 2^(2n-1),
    and G / <B C^-2> = Z/2 x Z/2^(n-1).
    """
    started = time.perf_counter()
    levels = [int(n) for n in levels]
    parameters = {'levels': levels}
    details: Dict[str, Any] = {}
    for n in levels:
        if not 2 <= n <= 8:
            raise ValueError(f"Level exponent must lie in [2, 8], got {n}")
        modulus = 2 ** n
        with modulus_ceiling(modulus):
            a = GL2Element(modulus, -1, 0, 0, 1)
            b = GL2Element(modulus, 5, 0, 0, 5)
            c = GL2Element(modulus, -1, -1, 4, -1)
            d = b * c.inverse() ** 2
            relations = {
                'BC=CB': b * c == c * b,
                'AB=BA': a * b == b * a,
                'ACA=BC^-1': a * c * a == b * c.inverse(),
                'ACAC^-1=BC^-2': a * c * a * c.inverse() == d,
                'B^(2^(n-2))=1': (b ** (2 ** (n - 2))).is_identity,
                'C^(2^n)=1': (c ** modulus).is_identity,
                'D^(2^(n-1))=1': (d ** (2 ** (n - 1))).is_identity,
            }
            group = named_group(NamedGroupId('Curve32a3Level', (n,)))
            quotient = abelian_invariants(group, generate_subgroup(modulus, [d]))
        details[str(n)] = {'order': group.order, 'quotient': quotient.as_list()}
        broken = [name for name, holds in relations.items() if not holds]
        if broken:
            return _finish('curve-32a3', parameters, started,
                           {'level': modulus, 'relation': broken[0]}, details)
        if group.order != 2 ** (2 * n - 1):
            return _finish('curve-32a3', parameters, started,
                           {'level': modulus, 'order': group.order,
                            'expected': 2 ** (2 * n - 1)}, details)
        if quotient.as_list() != [2, 2 ** (n - 1)]:
            return _finish('curve-32a3', parameters, started,
                           {'level': modulus, 'quotient': quotient.as_list(),
                            'expected': [2, 2 ** (n - 1)]}, details)
    return _finish('curve-32a3', parameters, started, details=details)


def _two_power_exponent(modulus: int) -> int:
    exponent = modulus.bit_length() - 1
    if modulus < 2 or modulus != 1 << exponent:
        raise ModulusError(f"2-adic group files need a power-of-2 modulus, got {modulus}")
    return exponent


def rzb_scan(group_file: Optional['GroupFile'] = None,
             expected: Optional[Dict[str, List[int]]] = None) -> VerificationReport:
    """
    Levels k with |G mod 2^(k+1)| = |G mod 2^k| for each group of a file.

    Equal orders make reduction G_{k+1} -> G_k an isomorphism, the group
    shadow of Q(E[2^(k+1)]) = Q(E[2^k]).

    Args:
        group_file: Groups mod 2^K (default: the bundled sample)
        expected: Coincidence levels per label; the report fails on any
            difference (defaults to RZB_SAMPLE_EXPECTED for the sample)
    """
    started = time.perf_counter()
    if group_file is None:
        from ..utils.group_data import load_sample_groups
        group_file = load_sample_groups()
        if expected is None:
            expected = RZB_SAMPLE_EXPECTED
    top = _two_power_exponent(group_file.modulus)
    parameters = {'modulus': group_file.modulus, 'groups': len(group_file.groups)}

    scanned = []
    for group in group_file.subgroups():
        orders = [int(_reduced_codes(group, 2 ** k).size) for k in range(1, top + 1)]
        coincidences = [k for k in range(1, top) if orders[k] == orders[k - 1]]
        scanned.append({'label': group.label, 'orders': orders, 'coincidences': coincidences})
    details = {'groups': scanned,
               'with_coincidence': [s['label'] for s in scanned if s['coincidences']]}

    for entry in scanned:
        wanted = (expected or {}).get(entry['label'])
        if wanted is not None and entry['coincidences'] != wanted:
            return _finish('rzb', parameters, started,
                           {'label': entry['label'], 'coincidences': entry['coincidences'],
                            'expected': wanted}, details)
    return _finish('rzb', parameters, started, details=details)


# ---------------------------------------------------------------------------
# Composite levels
# ---------------------------------------------------------------------------

def verify_mod6_images(jobs: int = 1, cache_dir=None) -> VerificationReport:
    """
    Non-abelian det-surjective subgroups of GL(2, Z/6Z) on which both
    reductions mod 2 and mod 3 are injective are, up to conjugacy, exactly
    Mod6H1 and Mod6H2, and those two are not conjugate.
    """
    started = time.perf_counter()
    candidates = enumerate_subgroups(6, SubgroupFilter(det_surjective=True, non_abelian=True),
                                     jobs=jobs, cache_dir=cache_dir)
    graphs = [g for g in candidates
              if _reduced_codes(g, 2).size == g.order and _reduced_codes(g, 3).size == g.order]
    h1 = named_group(NamedGroupId('Mod6H1'))
    h2 = named_group(NamedGroupId('Mod6H2'))
    details = {'found': [_describe(g) for g in graphs],
               'Mod6H1_mod3_order': int(_reduced_codes(h1, 3).size),
               'Mod6H2_mod3_order': int(_reduced_codes(h2, 3).size)}

    if are_conjugate(h1, h2)[0]:
        return _finish('mod6-images', {}, started,
                       {'subgroups': [_describe(h1), _describe(h2)],
                        'reason': "Mod6H1 and Mod6H2 are conjugate"}, details)
    for named in (h1, h2):
        if not any(are_conjugate(g, named)[0] for g in graphs):
            return _finish('mod6-images', {}, started,
                           {'subgroup': _describe(named), 'reason': "not found by the search"},
                           details)
    extra = [g for g in graphs if not any(are_conjugate(g, h)[0] for h in (h1, h2))]
    if extra:
        return _finish('mod6-images', {}, started,
                       {'subgroup': _describe(extra[0]),
                        'reason': "search found a class beyond Mod6H1, Mod6H2"}, details)
    return _finish('mod6-images', {}, started, details=details)


def verify_mod12_groups() -> VerificationReport:
    """
    Mod12H1pi4 and Mod12H2pi4 are admissible, dihedral of order 8, reduce to
    N_s(3) and their prescribed mod-4 groups, and lie in Mod12Htilde_pi4.
    """
    started = time.perf_counter()
    ns3 = named_group(NamedGroupId('SplitCartanNormalizer', (3,)))
    tilde = named_group(NamedGroupId('Mod12Htilde_pi4'))
    details: Dict[str, Any] = {'Mod12Htilde_pi4_order': tilde.order}

    def failure(group: Subgroup, reason: str) -> VerificationReport:
        return _finish('mod12-groups', {}, started,
                       {'subgroup': _describe(group), 'reason': reason}, details)

    for name in ('Mod12H1pi4', 'Mod12H2pi4', 'Mod12Htilde_pi4'):
        group = tilde if name == 'Mod12Htilde_pi4' else named_group(NamedGroupId(name))
        if not np.array_equal(_reduced_codes(group, 3), ns3.codes):
            return failure(group, "reduction mod 3 is not N_s(3)")
        if not np.array_equal(_reduced_codes(group, 4), mod12_pi4_image(name).codes):
            return failure(group, "reduction mod 4 is not the prescribed group")
        if group is tilde:
            continue
        histogram = dict(order_histogram(group))
        details[name] = {'order': group.order,
                         'histogram': {str(k): v for k, v in histogram.items()},
                         'generators': [str(g) for g in group.small_generators]}
        if group.order != 8 or group.is_abelian() or histogram != D4_ORDER_HISTOGRAM:
            return failure(group, "not dihedral of order 8")
        if not is_admissible(group):
            return failure(group, "not admissible")
        if not group.is_subgroup_of(tilde):
            return failure(group, "not contained in Mod12Htilde_pi4")
    return _finish('mod12-groups', {}, started, details=details)


# ---------------------------------------------------------------------------
# Arithmetic, families and curves
# ---------------------------------------------------------------------------

def verify_cyclotomic_bound_table(max_prime: int = 50, max_exponent: int = 3) -> VerificationReport:
    """
    For primes p < q, Q(zeta_{q^m}) in Q(E[p^n]) forces m <= 1, except
    m <= 2 for (p, q) = (2, 3).
    """
    started = time.perf_counter()
    parameters = {'max_prime': max_prime, 'max_exponent': max_exponent}
    known = {(2, 1, 3): 2, (3, 1, 5): 1, (3, 1, 7): 1, (3, 1, 11): 0}
    for (p, n, q), value in known.items():
        got = cyclotomic_bound(p, n, q)
        if got != value:
            return _finish('cyclotomic-bound', parameters, started,
                           {'p': p, 'n': n, 'q': q, 'bound': got, 'expected': value})

    primes = list(primerange(2, max_prime + 1))
    table: Dict[str, int] = {}
    for p in primes:
        for q in primes:
            if q <= p:
                continue
            cap = 2 if (p, q) == (2, 3) else 1
            for n in range(1, max_exponent + 1):
                value = cyclotomic_bound(p, n, q)
                if value > cap or ((p, q) == (2, 3) and value != cap):
                    return _finish('cyclotomic-bound', parameters, started,
                                   {'p': p, 'n': n, 'q': q, 'bound': value, 'cap': cap})
            table[f"{p},{q}"] = cyclotomic_bound(p, 1, q)
    details = {
        'table_n1': table,
        'obstruction_2_3': str(coincidence_obstruction(2, 3)),
        'note': "the obstruction test assumes p odd; at p = 2 it flags (2,3), which occurs",
    }
    return _finish('cyclotomic-bound', parameters, started, details=details)


def verify_cm_exclusion(jobs: int = 1) -> VerificationReport:
    """No CM j-invariant is a value of the mod-4 j-line; the planted control is found."""
    started = time.perf_counter()
    report = cm_exclusion_scan(jobs=jobs)
    details = {'family': report.family_id.value,
               'entries': [{'j0': str(e.j0), 'control': e.control,
                            'roots': [str(r) for r in e.roots]} for e in report.entries]}
    for entry in report.entries:
        if entry.control and entry.excluded:
            return _finish('cm-exclusion', {}, started,
                           {'j0': str(entry.j0), 'reason': "control value has no rational preimage"},
                           details)
        if not entry.control and not entry.excluded:
            return _finish('cm-exclusion', {}, started,
                           {'j0': str(entry.j0), 'roots': [str(r) for r in entry.roots]}, details)
    return _finish('cm-exclusion', {}, started, details=details)


def verify_curve_examples(bound: int = 10 ** 5, threshold: int = WITNESS_THRESHOLD,
                          seed: int = DEFAULT_SEED, jobs: int = 1,
                          cache_dir=None) -> VerificationReport:
    """
    The worked curves: coincidences, the 40a4 mod-4 image, cyclotomic
    containments and the 18176r2 split residues mod 16.
    """
    started = time.perf_counter()
    parameters = {'bound': bound, 'threshold': threshold, 'seed': seed}
    curves = {label: RationalCurve.parse(text) for label, text in CURVES.items()}
    details: Dict[str, Any] = {}

    for label, m, n in COINCIDENCE_EXAMPLES:
        verdict = coincide_heuristic(curves[label], m, n, bound, threshold, seed=seed, jobs=jobs,
                                     cache_dir=cache_dir)
        details[f"{label} {m},{n}"] = verdict.to_dict()
        if verdict.verdict is not Verdict.HEURISTICALLY_EQUAL:
            return _finish('curve-examples', parameters, started,
                           {'curve': label, 'levels': [m, n], 'verdict': verdict.verdict.value,
                            'prime': verdict.witness}, details)

    image = probe_image(curves['40a4'], 4, min(bound, DEFAULT_BOUND), seed=seed, jobs=jobs,
                        cache_dir=cache_dir)
    orders = sorted(g.order for g in image.minimal_survivors)
    details['40a4 image mod 4'] = orders
    if orders != [2]:
        return _finish('curve-examples', parameters, started,
                       {'curve': '40a4', 'modulus': 4, 'minimal_survivor_orders': orders}, details)

    for label, level, root, congruence in CONTAINMENT_EXAMPLES:
        result = cyclotomic_containment(curves[label], level, root, bound, threshold,
                                        congruence=congruence, seed=seed, jobs=jobs)
        details[f"{label} zeta_{root} in E[{level}]"] = {
            'verdict': result.verdict.value, 'split_primes': len(result.witnesses)}
        if result.verdict is not Verdict.PASS:
            return _finish('curve-examples', parameters, started,
                           {'curve': label, 'level': level, 'root': root,
                            'verdict': result.verdict.value, 'prime': result.counterexample},
                           details)

    residues = split_residue_subgroup(curves['18176r2'], 5, 16, bound, seed=seed, jobs=jobs)
    details['18176r2 split residues mod 16'] = residues
    if len(residues) > 2:
        return _finish('curve-examples', parameters, started,
                       {'curve': '18176r2', 'level': 5, 'residues': residues}, details)
    return _finish('curve-examples', parameters, started, details=details)


# ---------------------------------------------------------------------------
# Registry and suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Claim:
    """A verification routine with the parameter sets the suite runs it on."""

    runner: Callable[..., VerificationReport]
    defaults: Tuple[Dict[str, Any], ...] = ({},)
    options: Tuple[str, ...] = ()

    def run(self, parameters: Dict[str, Any], options: Dict[str, Any]) -> VerificationReport:
        extra = {k: v for k, v in options.items() if k in self.options and k not in parameters}
        return self.runner(**parameters, **extra)


_PRIME_POWER_LEVELS = tuple({'p': p, 'n': n} for p, n in
                            ((2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (5, 2), (7, 1)))
_SEARCH = ('jobs', 'cache_dir')

CLAIMS: Dict[str, Claim] = {
    'max-ppower-order': Claim(verify_max_ppower_order, _PRIME_POWER_LEVELS),
    'kernel-order': Claim(verify_kernel_order, _PRIME_POWER_LEVELS),
    'det-square': Claim(verify_det_square, ({'p': 3, 'n': 1}, {'p': 3, 'n': 2}, {'p': 5, 'n': 1})),
    'split-cartan': Claim(verify_split_cartan_structure, ({'p': 3}, {'p': 5}, {'p': 7}), _SEARCH),
    'nonsplit-cartan': Claim(verify_nonsplit_structure, ({'p': 3}, {'p': 5}), _SEARCH),
    'exceptional': Claim(verify_exceptional),
    'mod9-mod4': Claim(verify_mod9_mod4_exclusion, options=_SEARCH),
    'pairs': Claim(scan_pairs, ({'max_level': 10},), _SEARCH),
    'curve-32a3': Claim(verify_32a3, ({'levels': (2, 3, 4, 5, 6)},)),
    'rzb': Claim(rzb_scan),
    'mod6-images': Claim(verify_mod6_images, options=_SEARCH),
    'mod12-groups': Claim(verify_mod12_groups),
    'abelian-table': Claim(verify_abelian_table, options=_SEARCH),
    'cyclotomic-bound': Claim(verify_cyclotomic_bound_table),
    'cm-exclusion': Claim(verify_cm_exclusion, options=('jobs',)),
    'curve-examples': Claim(verify_curve_examples, options=_SEARCH + ('seed', 'bound')),
}


def run_claim(claim_id: str, parameters: Optional[Dict[str, Any]] = None, jobs: int = 1,
              cache_dir=None, seed: int = DEFAULT_SEED,
              bound: Optional[int] = None) -> List[VerificationReport]:
    """
    Run one claim on explicit parameters, or on its default parameter sets.

    Raises:
        ValueError: If the claim id is unknown
    """
    if claim_id not in CLAIMS:
        raise ValueError(f"Unknown claim '{claim_id}'; choose from {', '.join(sorted(CLAIMS))}")
    claim = CLAIMS[claim_id]
    options: Dict[str, Any] = {'jobs': jobs, 'cache_dir': cache_dir, 'seed': seed}
    if bound is not None:
        options['bound'] = bound
    parameter_sets = [parameters] if parameters else list(claim.defaults)
    return [claim.run(dict(p), options) for p in parameter_sets]


def _sort_key(report: VerificationReport) -> Tuple[str, str]:
    return report.claim, json.dumps(report.parameters, sort_keys=True, default=str)


def run_suite(claims: Optional[Sequence[str]] = None, jobs: int = 1, cache_dir=None,
              seed: int = DEFAULT_SEED, bound: Optional[int] = None) -> List[VerificationReport]:
    """
    Run claims (default: all) in a thread pool of `jobs` workers.

    Returns:
        Reports sorted by claim id, then parameters
    """
    selected = list(claims) if claims else sorted(CLAIMS)
    for claim_id in selected:
        if claim_id not in CLAIMS:
            raise ValueError(f"Unknown claim '{claim_id}'")

    def run(claim_id: str) -> List[VerificationReport]:
        return run_claim(claim_id, jobs=1, cache_dir=cache_dir, seed=seed, bound=bound)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            batches = list(executor.map(run, selected))
    else:
        batches = [run(claim_id) for claim_id in selected]
    reports = [report for batch in batches for report in batch]
    return sorted(reports, key=_sort_key)


def suite_to_dataframe(reports: Sequence[VerificationReport]) -> pd.DataFrame:
    return pd.DataFrame({
        'claim': [r.claim for r in reports],
        'parameters': [json.dumps(r.parameters, sort_keys=True, default=str) for r in reports],
        'verdict': [r.verdict for r in reports],
        'elapsed': [round(r.elapsed, 3) for r in reports],
    })
