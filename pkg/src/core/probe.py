"""
Frobenius sampling: probable images, split sets, coincidence and
cyclotomic-containment verdicts, plus the curve-free arithmetic tests.

Only the negative direction is rigorous: a prime that splits at one level
but not at the other proves two division fields differ. Agreement of split
sets up to a bound is reported as heuristic.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from math import gcd
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sympy import factorint, isprime, primerange, totient

from .curve import COUNTING_BOUND, DEFAULT_SEED, FrobData, RationalCurve, frobenius_data, has_good_reduction
from .enumeration import ENUMERATION_CEILING, SubgroupFilter, enumerate_subgroups
from .errors import NoPrimesError
from .groups import Subgroup, fixed_space_signatures, signature_of_structure, traces_and_dets
from .modring import gl2_order

logger = logging.getLogger(__name__)

DEFAULT_BOUND = 10 ** 4

# Split primes required before a positive verdict is issued.
WITNESS_THRESHOLD = 5


class Verdict(Enum):
    HEURISTICALLY_EQUAL = "heuristically-equal"
    UNEQUAL = "unequal-with-witness"
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


def _check_bound(bound: int) -> int:
    bound = int(bound)
    if bound > COUNTING_BOUND:
        raise ValueError(f"Prime bound {bound} exceeds the counting bound {COUNTING_BOUND}")
    return bound


def _parallel_map(function: Callable, items: Sequence, jobs: int) -> List:
    if jobs <= 1 or len(items) < 2:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(function, items))


def partition_primes(curve: RationalCurve, bound: int, level: int = 1) -> Tuple[List[int], List[int]]:
    """
    Primes up to the bound, split into usable and skipped ones.

    A prime is skipped when it divides the level or the curve has bad
    reduction there (the model discriminant, not the minimal one, decides).
    """
    used, skipped = [], []
    for prime in primerange(2, bound + 1):
        if level % prime == 0 or not has_good_reduction(curve, prime):
            skipped.append(int(prime))
        else:
            used.append(int(prime))
    return used, skipped


# ---------------------------------------------------------------------------
# Probable image
# ---------------------------------------------------------------------------

@dataclass
class ProbableImage:
    """
    Admissible candidates for the mod-n image that are consistent with
    every sampled Frobenius.

    `observed` maps (trace, det, fixed-space signature) to the primes that
    produced it; the signature is 0 when structures were not sampled.
    """

    modulus: int
    survivors: List[Subgroup]
    observed: Dict[Tuple[int, int, int], List[int]]
    primes_used: List[int]
    primes_skipped: List[int]
    insufficient_sampling: bool = False

    @property
    def consistent(self) -> bool:
        return bool(self.survivors)

    @property
    def minimal_survivors(self) -> List[Subgroup]:
        if not self.survivors:
            return []
        smallest = min(g.order for g in self.survivors)
        return [g for g in self.survivors if g.order == smallest]

    def observed_dets(self) -> List[int]:
        return sorted({det for _, det, _ in self.observed})

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({
            'label': [g.label for g in self.survivors],
            'order': [g.order for g in self.survivors],
            'generators': [" | ".join(str(h) for h in g.generators) for g in self.survivors],
        })


def _unit_group_closure(values: Sequence[int], modulus: int) -> set:
    result = {1 % modulus}
    frontier = set(result)
    while frontier:
        fresh = {(a * v) % modulus for a in frontier for v in values} - result
        result |= fresh
        frontier = fresh
    return result


def _observation(data: FrobData, modulus: int) -> Tuple[int, int, int]:
    signature = 0
    if data.structure is not None:
        signature = signature_of_structure(data.structure[0], data.structure[1], modulus)
    return (data.trace % modulus, data.prime % modulus, signature)


def _element_keys(group: Subgroup, structured: bool) -> set:
    n = group.modulus
    traces, dets = traces_and_dets(group.codes, n)
    if structured:
        signatures = fixed_space_signatures(group.codes, n)
    else:
        signatures = np.zeros(group.codes.size, dtype=np.int64)
    return set(zip(traces.tolist(), dets.tolist(), signatures.tolist()))


def probe_image(curve: RationalCurve, modulus: int, bound: int = DEFAULT_BOUND,
                structured: bool = True, seed: int = DEFAULT_SEED, jobs: int = 1,
                cache_dir=None) -> ProbableImage:
    """
    Sieve the admissible subgroups mod n by sampled Frobenius elements.

    A candidate H survives when every observed (trace, det) is realised by
    some element of H; with `structured`, that element must also have a
    fixed space on (Z/n)^2 isomorphic to E(F_l)[n].

    Raises:
        EnumerationCeilingError: If GL(2, Z/nZ) is too large to enumerate
        NoPrimesError: If no usable prime lies below the bound
    """
    bound = _check_bound(bound)
    candidates = enumerate_subgroups(modulus, SubgroupFilter.admissible(), jobs=jobs,
                                     cache_dir=cache_dir)
    used, skipped = partition_primes(curve, bound, modulus)
    if not used:
        raise NoPrimesError(f"No good primes prime to {modulus} up to {bound}")

    samples = _parallel_map(lambda p: frobenius_data(curve, p, structured, seed), used, jobs)
    observed: Dict[Tuple[int, int, int], List[int]] = {}
    for data in samples:
        observed.setdefault(_observation(data, modulus), []).append(data.prime)

    keys = set(observed)
    survivors = [g for g in candidates if keys <= _element_keys(g, structured)]
    dets = {det for _, det, _ in keys}
    insufficient = len(_unit_group_closure(sorted(dets), modulus)) < int(totient(modulus))
    if insufficient:
        logger.warning(f"Observed determinants {sorted(dets)} do not generate (Z/{modulus})^x")
    if not survivors:
        logger.warning(f"No admissible subgroup mod {modulus} is consistent with the sample")
    logger.info(f"Probe mod {modulus}: {len(used)} primes, {len(keys)} Frobenius types, "
                f"{len(survivors)}/{len(candidates)} candidates survive")
    return ProbableImage(modulus=modulus, survivors=survivors, observed=observed,
                         primes_used=used, primes_skipped=skipped,
                         insufficient_sampling=insufficient)


# ---------------------------------------------------------------------------
# Split sets
# ---------------------------------------------------------------------------

def _splits(curve: RationalCurve, prime: int, level: int, seed: int) -> bool:
    if (prime - 1) % level:
        return False
    data = frobenius_data(curve, prime, want_structure=False)
    if data.count % level:
        return False
    if level == 1:
        return True
    return frobenius_data(curve, prime, want_structure=True, seed=seed).full_torsion(level)


def split_set(curve: RationalCurve, level: int, bound: int = DEFAULT_BOUND,
              congruence: Optional[Tuple[int, int]] = None, seed: int = DEFAULT_SEED,
              jobs: int = 1) -> List[int]:
    """
    Good primes l <= bound, l prime to the level, with E[n] contained in E(F_l).

    Args:
        curve: Curve over Q
        level: n
        bound: Prime bound
        congruence: Optional (m, r) keeping only l = r mod m
        seed: Base seed for the structure computations
        jobs: Worker threads

    Returns:
        The split primes in increasing order
    """
    bound = _check_bound(bound)
    used, _ = partition_primes(curve, bound, level)
    if congruence is not None:
        mod, residue = congruence
        used = [p for p in used if p % mod == residue % mod]
    flags = _parallel_map(lambda p: _splits(curve, p, level, seed), used, jobs)
    return [p for p, flag in zip(used, flags) if flag]


def split_residue_subgroup(curve: RationalCurve, level: int, modulus: int,
                           bound: int = DEFAULT_BOUND, seed: int = DEFAULT_SEED,
                           jobs: int = 1) -> List[int]:
    """Subgroup of (Z/modulus)^x generated by the split primes at the level."""
    residues = sorted({p % modulus for p in split_set(curve, level, bound, seed=seed, jobs=jobs)
                       if gcd(p, modulus) == 1})
    return sorted(_unit_group_closure(residues, modulus))


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

@dataclass
class CoincidenceVerdict:
    levels: Tuple[int, int]
    verdict: Verdict
    witness: Optional[int] = None
    witness_level: Optional[int] = None
    split_sizes: Dict[int, int] = field(default_factory=dict)
    common: int = 0
    notes: List[str] = field(default_factory=list)

    @property
    def rigorous(self) -> bool:
        return self.verdict is Verdict.UNEQUAL

    def to_dict(self) -> dict:
        return {
            'levels': list(self.levels),
            'verdict': self.verdict.value,
            'heuristic': self.verdict is Verdict.HEURISTICALLY_EQUAL,
            'witness': self.witness,
            'witness_level': self.witness_level,
            'split_sizes': {str(k): v for k, v in self.split_sizes.items()},
            'common': self.common,
            'notes': list(self.notes),
        }


def _enumerable(level: int) -> bool:
    return level >= 2 and gl2_order(level) <= ENUMERATION_CEILING


def coincide_heuristic(curve: RationalCurve, m: int, n: int, bound: int = DEFAULT_BOUND,
                       threshold: int = WITNESS_THRESHOLD, cross_check: bool = True,
                       seed: int = DEFAULT_SEED, jobs: int = 1,
                       cache_dir=None) -> CoincidenceVerdict:
    """
    Compare the split sets at levels m and n, away from primes dividing mn.

    A prime in the symmetric difference proves Q(E[m]) != Q(E[n]). Equal
    sets with at least `threshold` members give a heuristic equality, which
    `cross_check` downgrades to inconclusive when both levels are
    enumerable and the probable images have different minimal orders. The
    image probes sample primes up to min(bound, DEFAULT_BOUND).
    """
    if m == n:
        raise ValueError(f"Levels must differ, got m = n = {m}")
    split_m = [p for p in split_set(curve, m, bound, seed=seed, jobs=jobs) if (m * n) % p]
    split_n = [p for p in split_set(curve, n, bound, seed=seed, jobs=jobs) if (m * n) % p]
    only_m = sorted(set(split_m) - set(split_n))
    only_n = sorted(set(split_n) - set(split_m))
    result = CoincidenceVerdict(levels=(m, n), verdict=Verdict.INCONCLUSIVE,
                                split_sizes={m: len(split_m), n: len(split_n)},
                                common=len(set(split_m) & set(split_n)))
    if only_m or only_n:
        witness_m = only_m[0] if only_m else None
        witness_n = only_n[0] if only_n else None
        if witness_n is None or (witness_m is not None and witness_m < witness_n):
            result.witness, result.witness_level = witness_m, m
        else:
            result.witness, result.witness_level = witness_n, n
        result.verdict = Verdict.UNEQUAL
        return result
    if result.common >= threshold:
        result.verdict = Verdict.HEURISTICALLY_EQUAL
    else:
        result.notes.append(f"only {result.common} split primes up to {bound}, "
                            f"need {threshold}")
    if cross_check and result.verdict is Verdict.HEURISTICALLY_EQUAL:
        if _enumerable(m) and _enumerable(n):
            probe_bound = min(bound, DEFAULT_BOUND)
            probe_m = probe_image(curve, m, probe_bound, seed=seed, jobs=jobs, cache_dir=cache_dir)
            probe_n = probe_image(curve, n, probe_bound, seed=seed, jobs=jobs, cache_dir=cache_dir)
            orders_m = {g.order for g in probe_m.minimal_survivors}
            orders_n = {g.order for g in probe_n.minimal_survivors}
            if orders_m != orders_n:
                result.verdict = Verdict.INCONCLUSIVE
                result.notes.append(f"minimal survivor orders differ: {sorted(orders_m)} "
                                    f"vs {sorted(orders_n)}")
        else:
            result.notes.append("cross-check skipped: a level is above the enumeration ceiling")
    return result


@dataclass
class ContainmentResult:
    level: int
    root: int
    verdict: Verdict
    witnesses: List[int] = field(default_factory=list)
    counterexample: Optional[int] = None

    def to_dict(self) -> dict:
        return {'level': self.level, 'root': self.root, 'verdict': self.verdict.value,
                'witnesses': list(self.witnesses), 'counterexample': self.counterexample}


def _prime_power(value: int) -> Tuple[int, int]:
    factors = factorint(value)
    if value < 2 or len(factors) != 1:
        raise ValueError(f"{value} is not a prime power")
    return next(iter(factors.items()))


def cyclotomic_containment(curve: RationalCurve, level: int, root: int,
                           bound: int = DEFAULT_BOUND, threshold: int = WITNESS_THRESHOLD,
                           congruence: Optional[Tuple[int, int]] = None,
                           seed: int = DEFAULT_SEED, jobs: int = 1) -> ContainmentResult:
    """
    Test Q(zeta_{q^k}) in Q(E[n]): every split prime must be 1 mod q^k.

    Args:
        curve: Curve over Q
        level: n
        root: q^k
        bound: Prime bound
        threshold: Split primes required for a pass
        congruence: Optional (m, r) restriction of the scan

    Returns:
        fail with the first violating prime, pass with the split primes as
        witnesses, or inconclusive when too few primes split
    """
    _prime_power(root)
    primes = split_set(curve, level, bound, congruence=congruence, seed=seed, jobs=jobs)
    violating = [p for p in primes if p % root != 1]
    if violating:
        return ContainmentResult(level, root, Verdict.FAIL, witnesses=primes,
                                 counterexample=violating[0])
    verdict = Verdict.PASS if len(primes) >= threshold else Verdict.INCONCLUSIVE
    return ContainmentResult(level, root, verdict, witnesses=primes)


# ---------------------------------------------------------------------------
# Curve-free arithmetic
# ---------------------------------------------------------------------------

def _valuation(value: int, prime: int) -> int:
    count = 0
    while value % prime == 0:
        value //= prime
        count += 1
    return count


def cyclotomic_bound(p: int, n: int, q: int) -> int:
    """
    Largest m >= 0 with q^(m-1)(q-1) dividing p^(4(n-1)+1) (p-1)^2 (p+1).

    This caps q^m for Q(zeta_{q^m}) inside Q(E[p^n]) via the order of
    GL(2, Z/p^nZ).
    """
    if not (isprime(p) and isprime(q)):
        raise ValueError(f"p = {p} and q = {q} must both be prime")
    if p == q:
        raise ValueError(f"p and q must differ, got {p}")
    if n < 1:
        raise ValueError(f"Level exponent must be positive, got {n}")
    order = p ** (4 * (n - 1) + 1) * (p - 1) ** 2 * (p + 1)
    if order % (q - 1):
        return 0
    return 1 + _valuation(order, q)


@dataclass(frozen=True)
class Obstruction:
    obstructed: bool
    prime: Optional[int] = None
    exponent: Optional[int] = None

    def __str__(self) -> str:
        if not self.obstructed:
            return "unobstructed"
        return f"obstructed({self.prime},{self.exponent})"


def coincidence_obstruction(p: int, m: int) -> Obstruction:
    """
    First odd q^e exactly dividing m with phi(q^e) not dividing p - 1.

    Such a q^e rules out Q(E[p]) = Q(E[m]).
    """
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    for q, e in sorted(factorint(m).items()):
        if q == 2:
            continue
        if (p - 1) % (q ** (e - 1) * (q - 1)):
            return Obstruction(True, q, e)
    return Obstruction(False)
