"""
Finite subgroups of GL(2, Z/NZ).

Elements are handled in bulk as int64 codes ((a*N + b)*N + c)*N + d, so
closures, cosets and conjugator searches are numpy array operations rather
than Python loops over matrices.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import factorint

from .errors import ModulusError, QuotientError
from .modring import GL2Element, check_modulus, gl2_order

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Vectorised code arithmetic
# ---------------------------------------------------------------------------

def identity_code(modulus: int) -> int:
    return modulus ** 3 + 1


def decode(codes, modulus: int):
    """Split codes into entry arrays (a, b, c, d)."""
    codes = np.asarray(codes, dtype=np.int64)
    rest, d = np.divmod(codes, modulus)
    rest, c = np.divmod(rest, modulus)
    a, b = np.divmod(rest, modulus)
    return a, b, c, d


def encode(a, b, c, d, modulus: int):
    return ((a * modulus + b) * modulus + c) * modulus + d


def multiply(x, y, modulus: int) -> np.ndarray:
    """Products x*y of (broadcast) code arrays."""
    a, b, c, d = decode(x, modulus)
    e, f, g, h = decode(y, modulus)
    return encode((a * e + b * g) % modulus, (a * f + b * h) % modulus,
                  (c * e + d * g) % modulus, (c * f + d * h) % modulus, modulus)


@lru_cache(maxsize=None)
def _unit_inverses(modulus: int) -> np.ndarray:
    table = np.zeros(modulus, dtype=np.int64)
    for u in range(1, modulus):
        if gcd(u, modulus) == 1:
            table[u] = pow(u, -1, modulus)
    return table


def invert(x, modulus: int) -> np.ndarray:
    a, b, c, d = decode(x, modulus)
    det_inv = _unit_inverses(modulus)[(a * d - b * c) % modulus]
    return encode((d * det_inv) % modulus, (-b * det_inv) % modulus,
                  (-c * det_inv) % modulus, (a * det_inv) % modulus, modulus)


def power(x, exponent: int, modulus: int) -> np.ndarray:
    """Elementwise x^exponent for a non-negative scalar exponent."""
    x = np.asarray(x, dtype=np.int64)
    result = np.full(x.shape, identity_code(modulus), dtype=np.int64)
    base = x
    while exponent:
        if exponent & 1:
            result = multiply(result, base, modulus)
        base = multiply(base, base, modulus)
        exponent >>= 1
    return result


def traces_and_dets(codes, modulus: int) -> Tuple[np.ndarray, np.ndarray]:
    a, b, c, d = decode(codes, modulus)
    return (a + d) % modulus, (a * d - b * c) % modulus


def reduce_codes(codes, modulus: int, target: int) -> np.ndarray:
    a, b, c, d = decode(codes, modulus)
    return encode(a % target, b % target, c % target, d % target, target)


def element_orders(codes, modulus: int, multiple: int) -> np.ndarray:
    """
    Orders of the elements given a common multiple of all of them.

    Each prime of the multiple is divided out while the corresponding power
    stays trivial.
    """
    codes = np.asarray(codes, dtype=np.int64)
    orders = np.full(codes.shape, multiple, dtype=np.int64)
    ident = identity_code(modulus)
    for p, e in sorted(factorint(multiple).items()):
        for _ in range(e):
            idx = np.nonzero(orders % p == 0)[0]
            if idx.size == 0:
                break
            reduced = orders[idx] // p
            trivial = np.zeros(idx.size, dtype=bool)
            for k in np.unique(reduced):
                sel = reduced == k
                trivial[sel] = power(codes[idx[sel]], int(k), modulus) == ident
            if not trivial.any():
                break
            orders[idx[trivial]] //= p
    return orders


def _member(sorted_codes: np.ndarray, values) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    if sorted_codes.size == 0:
        return np.zeros(values.shape, dtype=bool)
    idx = np.searchsorted(sorted_codes, values)
    idx = np.minimum(idx, sorted_codes.size - 1)
    return sorted_codes[idx] == values


def closure(modulus: int, generator_codes: Iterable[int],
            seed: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Sorted codes of the group generated by `generator_codes` (and `seed`).

    Breadth-first: every new element is multiplied on the right by each
    generator until no new products appear.
    """
    gens = np.unique(np.asarray(list(generator_codes), dtype=np.int64))
    known = np.array([identity_code(modulus)], dtype=np.int64)
    if seed is not None:
        known = np.union1d(known, seed)
    if gens.size == 0:
        return known
    frontier = known
    while frontier.size:
        products = np.unique(multiply(frontier[:, None], gens[None, :], modulus))
        fresh = products[~_member(known, products)]
        if fresh.size == 0:
            break
        known = np.union1d(known, fresh)
        frontier = fresh
    return known


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AbelianInvariants:
    """
    A finite abelian group Z/d1 x ... x Z/dk with d1 | d2 | ... | dk.

    The empty tuple is the trivial group.
    """

    factors: Tuple[int, ...] = ()

    def __post_init__(self):
        factors = tuple(int(f) for f in self.factors)
        object.__setattr__(self, 'factors', factors)
        if any(f < 2 for f in factors):
            raise ValueError(f"Invariant factors must be >= 2, got {list(factors)}")
        for small, large in zip(factors, factors[1:]):
            if large % small:
                raise ValueError(f"Invariant factors {list(factors)} do not form "
                                 f"a divisibility chain")

    @classmethod
    def from_orders(cls, orders: Iterable[int]) -> 'AbelianInvariants':
        """Normalise a product of cyclic groups of the given orders."""
        primary: Dict[int, List[int]] = {}
        for order in orders:
            for p, e in factorint(int(order)).items():
                primary.setdefault(p, []).append(p ** e)
        if not primary:
            return cls(())
        rank = max(len(v) for v in primary.values())
        factors = [1] * rank
        for powers in primary.values():
            powers.sort(reverse=True)
            for i, q in enumerate(powers):
                factors[rank - 1 - i] *= q
        return cls(tuple(f for f in factors if f > 1))

    @property
    def order(self) -> int:
        result = 1
        for f in self.factors:
            result *= f
        return result

    @property
    def exponent(self) -> int:
        return self.factors[-1] if self.factors else 1

    def as_list(self) -> List[int]:
        return list(self.factors)

    def __str__(self) -> str:
        if not self.factors:
            return "trivial"
        return " x ".join(f"Z/{f}" for f in self.factors)


@dataclass(frozen=True)
class GroupFingerprint:
    """Isomorphism invariants; equal fingerprints are necessary for isomorphism."""

    order: int
    order_histogram: Tuple[Tuple[int, int], ...]
    abelian: AbelianInvariants
    center_order: int
    derived_order: int


class Subgroup:
    """
    A subgroup of GL(2, Z/NZ) stored as its full sorted element list.

    Invariants that cost a pass over the elements (orders, classes,
    fingerprint, commutator subgroup) are computed on first use and cached.
    """

    def __init__(self,
                 modulus: int,
                 codes,
                 generators: Optional[Sequence[GL2Element]] = None,
                 label: Optional[str] = None):
        """
        Args:
            modulus: N
            codes: Element codes; must already form a group
            generators: Generators, if known (computed greedily otherwise)
            label: Optional display name
        """
        self.modulus = int(modulus)
        codes = np.unique(np.asarray(codes, dtype=np.int64))
        codes.setflags(write=False)
        self.codes = codes
        self.label = label
        self._generators = tuple(generators) if generators is not None else None
        self._cache: Dict[str, object] = {}
        if self._generators is not None:
            for g in self._generators:
                if g.modulus != self.modulus:
                    raise ModulusError(f"Generator {g} is mod {g.modulus}, "
                                       f"subgroup is mod {self.modulus}")

    @classmethod
    def from_elements(cls, elements: Sequence[GL2Element], modulus: int,
                      label: Optional[str] = None) -> 'Subgroup':
        """Wrap an element set that is known to be closed (e.g. a Cartan)."""
        return cls(modulus, [g.code for g in elements], label=label)

    # -- basic protocol ---------------------------------------------------

    def __len__(self) -> int:
        return int(self.codes.size)

    @property
    def order(self) -> int:
        return len(self)

    def __contains__(self, g: GL2Element) -> bool:
        return g.modulus == self.modulus and bool(_member(self.codes, [g.code])[0])

    def contains_codes(self, codes) -> np.ndarray:
        return _member(self.codes, codes)

    def positions(self, codes) -> np.ndarray:
        """Indices of (member) codes in the sorted element list."""
        return np.searchsorted(self.codes, np.asarray(codes, dtype=np.int64))

    def is_subgroup_of(self, other: 'Subgroup') -> bool:
        return (other.modulus == self.modulus
                and bool(other.contains_codes(self.codes).all()))

    def __eq__(self, other) -> bool:
        return (isinstance(other, Subgroup) and other.modulus == self.modulus
                and np.array_equal(other.codes, self.codes))

    def __hash__(self) -> int:
        return hash((self.modulus, self.codes.tobytes()))

    def __repr__(self) -> str:
        name = f"{self.label}, " if self.label else ""
        gens = ", ".join(f"({g})" for g in self.generators)
        return f"Subgroup({name}mod {self.modulus}, order {self.order}, <{gens}>)"

    # -- cached data ------------------------------------------------------

    def _cached(self, key: str, compute):
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]

    @property
    def elements(self) -> List[GL2Element]:
        return self._cached('elements', lambda: [
            GL2Element.from_code(int(c), self.modulus) for c in self.codes])

    @property
    def element_orders(self) -> np.ndarray:
        """Element orders aligned with `codes`."""
        return self._cached('orders', lambda: element_orders(
            self.codes, self.modulus, max(self.order, 1)))

    @property
    def generators(self) -> Tuple[GL2Element, ...]:
        if self._generators is None:
            self._generators = tuple(
                GL2Element.from_code(int(c), self.modulus)
                for c in _small_generating_set(self))
        return self._generators

    @property
    def generator_codes(self) -> np.ndarray:
        return np.array([g.code for g in self.generators], dtype=np.int64)

    @property
    def small_generators(self) -> Tuple[GL2Element, ...]:
        """A short generating set (never longer than `generators`)."""
        def compute():
            greedy = tuple(GL2Element.from_code(int(c), self.modulus)
                           for c in _small_generating_set(self))
            own = self.generators
            return greedy if len(greedy) < len(own) else own
        return self._cached('small_generators', compute)

    def is_abelian(self) -> bool:
        gens = self.generator_codes
        for i, x in enumerate(gens):
            for y in gens[i + 1:]:
                if multiply(x, y, self.modulus) != multiply(y, x, self.modulus):
                    return False
        return True

    def determinant_image(self) -> np.ndarray:
        _, dets = traces_and_dets(self.codes, self.modulus)
        return np.unique(dets)


def _small_generating_set(group: Subgroup) -> List[int]:
    """Greedy generators, preferring elements of large order."""
    codes = group.codes
    if codes.size <= 1:
        return []
    orders = group.element_orders
    ranking = np.lexsort((codes, -orders))
    gens: List[int] = []
    current = np.array([identity_code(group.modulus)], dtype=np.int64)
    for i in ranking:
        if current.size == codes.size:
            break
        c = int(codes[i])
        if _member(current, [c])[0]:
            continue
        gens.append(c)
        current = closure(group.modulus, gens, seed=current)
    return gens


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def generate_subgroup(modulus: int, gens: Sequence[GL2Element],
                      label: Optional[str] = None) -> Subgroup:
    """
    Subgroup generated by explicit matrices.

    Args:
        modulus: N
        gens: Generators, all mod N
        label: Optional display name

    Returns:
        The closure, with elements in canonical (code) order
    """
    modulus = check_modulus(modulus)
    for g in gens:
        if g.modulus != modulus:
            raise ModulusError(f"Generator {g} is mod {g.modulus}, expected mod {modulus}")
    codes = closure(modulus, [g.code for g in gens])
    return Subgroup(modulus, codes, generators=list(gens), label=label)


def extend_subgroup(group: Subgroup, extra: Sequence[GL2Element]) -> Subgroup:
    """<group, extra> reusing the known elements as the search seed."""
    gens = list(group.generators) + list(extra)
    codes = closure(group.modulus, [g.code for g in gens], seed=group.codes)
    return Subgroup(group.modulus, codes, generators=gens)


@lru_cache(maxsize=16)
def full_group(modulus: int) -> Subgroup:
    """GL(2, Z/NZ) with elementary generators."""
    modulus = check_modulus(modulus)
    all_codes = np.arange(modulus ** 4, dtype=np.int64)
    _, dets = traces_and_dets(all_codes, modulus)
    units = np.array([gcd(int(u), modulus) == 1 for u in range(modulus)])
    codes = all_codes[units[dets]]
    gens = [GL2Element(modulus, 1, 1, 0, 1), GL2Element(modulus, 1, 0, 1, 1)]
    covered = {1}
    for u in range(2, modulus):
        if gcd(u, modulus) == 1 and u not in covered:
            gens.append(GL2Element(modulus, u, 0, 0, 1))
            covered = _unit_closure(covered | {u}, modulus)
    group = Subgroup(modulus, codes, generators=gens, label=f"GL(2,Z/{modulus})")
    if group.order != gl2_order(modulus):
        raise RuntimeError(f"GL(2,Z/{modulus}) enumeration produced {group.order} elements")
    return group


def _unit_closure(units: set, modulus: int) -> set:
    result = {1}
    frontier = {1}
    while frontier:
        fresh = {(x * u) % modulus for x in frontier for u in units} - result
        result |= fresh
        frontier = fresh
    return result


def preimage(group: Subgroup, modulus: int) -> Subgroup:
    """
    Full inverse image of a mod-M group under reduction GL(2,Z/N) -> GL(2,Z/M).

    Args:
        group: Subgroup mod M
        modulus: N, a multiple of M
    """
    if modulus % group.modulus:
        raise ModulusError(f"{group.modulus} does not divide {modulus}")
    ambient = full_group(modulus)
    reduced = reduce_codes(ambient.codes, modulus, group.modulus)
    label = f"lift of {group.label}" if group.label else None
    return Subgroup(modulus, ambient.codes[group.contains_codes(reduced)], label=label)


def reduction_image(group: Subgroup, modulus: int) -> Subgroup:
    """Image of the group under entrywise reduction mod M (M | N)."""
    modulus = int(modulus)
    if modulus < 2 or group.modulus % modulus:
        raise ModulusError(f"Cannot reduce a mod-{group.modulus} group mod {modulus}")
    if modulus == group.modulus:
        return group
    codes = reduce_codes(group.codes, group.modulus, modulus)
    gens = [g.reduce(modulus) for g in group.generators]
    return Subgroup(modulus, codes, generators=gens)


def conjugate(group: Subgroup, g: GL2Element) -> Subgroup:
    """g^-1 * group * g."""
    n = group.modulus
    codes = multiply(multiply(invert(g.code, n), group.codes, n), g.code, n)
    gens = [g.inverse() * h * g for h in group.generators]
    return Subgroup(n, codes, generators=gens)


# ---------------------------------------------------------------------------
# Commutators, centre, quotients
# ---------------------------------------------------------------------------

def commutator_subgroup(group: Subgroup) -> Subgroup:
    """
    [G, G], as the normal closure of commutators of generators.
    """
    def compute():
        n = group.modulus
        gens = group.generators
        comms = []
        for i, x in enumerate(gens):
            for y in gens[i + 1:]:
                c = x * y * x.inverse() * y.inverse()
                if not c.is_identity:
                    comms.append(c)
        derived = generate_subgroup(n, comms)
        while True:
            missing = []
            for g in gens:
                for h in derived.generators:
                    conj = g.inverse() * h * g
                    if conj not in derived and conj not in missing:
                        missing.append(conj)
            if not missing:
                return derived
            derived = extend_subgroup(derived, missing)
    return group._cached('derived', compute)


def center(group: Subgroup) -> Subgroup:
    def compute():
        n = group.modulus
        mask = np.ones(group.codes.size, dtype=bool)
        for g in group.generator_codes:
            mask &= multiply(group.codes, g, n) == multiply(g, group.codes, n)
        return Subgroup(n, group.codes[mask])
    return group._cached('center', compute)


def is_normal(normal: Subgroup, group: Subgroup) -> bool:
    n = group.modulus
    if not normal.is_subgroup_of(group):
        return False
    for g in group.generator_codes:
        conj = multiply(multiply(invert(g, n), normal.generator_codes, n), g, n)
        if not normal.contains_codes(conj).all():
            return False
    return True


def coset_representatives(group: Subgroup, sub: Subgroup) -> np.ndarray:
    """First element (in code order) of each left coset x*sub, in order."""
    n = group.modulus
    labelled = np.zeros(group.codes.size, dtype=bool)
    reps = []
    while True:
        free = np.flatnonzero(~labelled)
        if free.size == 0:
            break
        x = group.codes[free[0]]
        reps.append(x)
        labelled[group.positions(multiply(x, sub.codes, n))] = True
    return np.array(reps, dtype=np.int64)


def _orders_modulo(reps: np.ndarray, sub: Subgroup, modulus: int) -> np.ndarray:
    """Least k >= 1 with x^k in sub, for each x."""
    orders = np.ones(reps.size, dtype=np.int64)
    current = reps.copy()
    active = ~sub.contains_codes(current)
    k = 1
    while active.any():
        k += 1
        current[active] = multiply(current[active], reps[active], modulus)
        done = active & sub.contains_codes(current)
        orders[done] = k
        active &= ~done
    return orders


def abelian_invariants(group: Subgroup, normal: Optional[Subgroup] = None) -> AbelianInvariants:
    """
    Invariant factors of group/normal (default: the abelianisation).

    Works on coset representatives: an element of maximal order in a finite
    abelian group spans a direct summand, so it is split off and the
    procedure repeats on the quotient by the enlarged subgroup.

    Raises:
        QuotientError: If `normal` is not normal or the quotient is not abelian
    """
    if normal is None:
        return group._cached('abelian', lambda: abelian_invariants(
            group, commutator_subgroup(group)))
    n = group.modulus
    if not normal.is_subgroup_of(group):
        raise QuotientError("The normal subgroup is not contained in the group")
    if not is_normal(normal, group):
        raise QuotientError("The given subgroup is not normal in the group")
    gens = group.generators
    for i, x in enumerate(gens):
        for y in gens[i + 1:]:
            if (x * y * x.inverse() * y.inverse()) not in normal:
                raise QuotientError(f"Quotient is not abelian: cosets of ({x}) and "
                                    f"({y}) do not commute")
    current = normal
    factors = []
    while current.order < group.order:
        reps = coset_representatives(group, current)
        orders = _orders_modulo(reps, current, n)
        best = int(np.argmax(orders))
        factors.append(int(orders[best]))
        current = extend_subgroup(current, [GL2Element.from_code(int(reps[best]), n)])
    return AbelianInvariants(tuple(reversed(factors)))


def order_histogram(group: Subgroup) -> Tuple[Tuple[int, int], ...]:
    return tuple(sorted(Counter(group.element_orders.tolist()).items()))


def fingerprint(group: Subgroup) -> GroupFingerprint:
    return group._cached('fingerprint', lambda: GroupFingerprint(
        order=group.order,
        order_histogram=order_histogram(group),
        abelian=abelian_invariants(group),
        center_order=center(group).order,
        derived_order=commutator_subgroup(group).order,
    ))


def scalar_subgroup(group: Subgroup) -> Subgroup:
    a, b, c, d = decode(group.codes, group.modulus)
    return Subgroup(group.modulus, group.codes[(b == 0) & (c == 0) & (a == d)])


def projective_order_histogram(group: Subgroup) -> Tuple[int, Dict[int, int]]:
    """
    Order of group/scalars and the histogram of element orders in it.

    Each coset of the scalar subgroup is counted once.
    """
    scalars = scalar_subgroup(group)
    reps = coset_representatives(group, scalars)
    orders = _orders_modulo(reps, scalars, group.modulus)
    return reps.size, dict(sorted(Counter(orders.tolist()).items()))


# ---------------------------------------------------------------------------
# Conjugacy
# ---------------------------------------------------------------------------

def class_key(group: Subgroup) -> tuple:
    """Cheap conjugation invariant: order and characteristic-polynomial histogram."""
    def compute():
        traces, dets = traces_and_dets(group.codes, group.modulus)
        values, counts = np.unique(traces * group.modulus + dets, return_counts=True)
        return (group.order, tuple(zip(values.tolist(), counts.tolist())))
    return group._cached('class_key', compute)


def _conjugators(source: Subgroup, target: Subgroup,
                 within: Optional[Subgroup] = None) -> np.ndarray:
    """All g in `within` with g^-1 * source * g contained in target."""
    n = source.modulus
    pool = (within or full_group(n)).codes
    inverses = invert(pool, n)
    mask = np.ones(pool.size, dtype=bool)
    for h in source.generator_codes:
        conj = multiply(multiply(inverses[mask], h, n), pool[mask], n)
        keep = target.contains_codes(conj)
        idx = np.flatnonzero(mask)
        mask[idx[~keep]] = False
        if not mask.any():
            break
    return pool[mask]


def are_conjugate(h: Subgroup, k: Subgroup,
                  within: Optional[Subgroup] = None) -> Tuple[bool, Optional[GL2Element]]:
    """
    Decide whether g^-1 H g = K for some g (in `within`, default GL(2,Z/N)).

    Returns:
        (True, witness) or (False, None)
    """
    if h.modulus != k.modulus or h.order != k.order:
        return False, None
    if h == k:
        return True, GL2Element.identity(h.modulus)
    if class_key(h) != class_key(k):
        return False, None
    found = _conjugators(h, k, within)
    if found.size == 0:
        return False, None
    return True, GL2Element.from_code(int(found[0]), h.modulus)


def is_conjugate_into(h: Subgroup, k: Subgroup,
                      within: Optional[Subgroup] = None) -> Optional[GL2Element]:
    """A g with g^-1 H g contained in K, or None."""
    if h.modulus != k.modulus or k.order % h.order:
        return None
    if h.is_subgroup_of(k):
        return GL2Element.identity(h.modulus)
    found = _conjugators(h, k, within)
    return GL2Element.from_code(int(found[0]), h.modulus) if found.size else None


def normalizer(group: Subgroup, within: Optional[Subgroup] = None) -> Subgroup:
    return Subgroup(group.modulus, _conjugators(group, group, within))


def conjugacy_classes(group: Subgroup) -> List[np.ndarray]:
    """Conjugacy classes as sorted code arrays, ordered by their least element."""
    def compute():
        n = group.modulus
        inverses = invert(group.codes, n)
        labelled = np.zeros(group.codes.size, dtype=bool)
        classes = []
        while True:
            free = np.flatnonzero(~labelled)
            if free.size == 0:
                return classes
            x = group.codes[free[0]]
            orbit = np.unique(multiply(multiply(inverses, x, n), group.codes, n))
            labelled[group.positions(orbit)] = True
            classes.append(orbit)
    return group._cached('classes', compute)


def centralizer_orders(group: Subgroup) -> np.ndarray:
    """|C_G(x)| for each x, aligned with `codes`."""
    def compute():
        sizes = np.zeros(group.codes.size, dtype=np.int64)
        for orbit in conjugacy_classes(group):
            sizes[group.positions(orbit)] = group.order // orbit.size
        return sizes
    return group._cached('centralizers', compute)


# ---------------------------------------------------------------------------
# Isomorphism
# ---------------------------------------------------------------------------

def _element_types(group: Subgroup) -> np.ndarray:
    """Automorphism-invariant type (order, centraliser order) per element."""
    return group.element_orders * (group.order + 1) + centralizer_orders(group)


def _homomorphism_images(source: Subgroup, gens: np.ndarray, images: np.ndarray,
                         target_modulus: int) -> Optional[np.ndarray]:
    """
    Extend gens -> images to a map on the whole source group.

    Returns the image of every element (aligned with source.codes) if the
    assignment defines an injective homomorphism, else None.
    """
    n = source.modulus
    image = np.full(source.codes.size, -1, dtype=np.int64)
    start = int(source.positions([identity_code(n)])[0])
    image[start] = identity_code(target_modulus)
    frontier = np.array([start], dtype=np.int64)
    while frontier.size:
        fresh = []
        for g, k in zip(gens, images):
            dst = source.positions(multiply(source.codes[frontier], g, n))
            val = multiply(image[frontier], k, target_modulus)
            existing = image[dst]
            if np.any((existing >= 0) & (existing != val)):
                return None
            new = existing < 0
            image[dst[new]] = val[new]
            if np.any(image[dst] != val):
                return None
            fresh.append(dst[new])
        frontier = np.unique(np.concatenate(fresh)) if fresh else frontier[:0]
    if np.unique(image).size != image.size:
        return None
    return image


def isomorphisms(h: Subgroup, k: Subgroup) -> Iterator[Dict[GL2Element, GL2Element]]:
    """
    Enumerate isomorphisms H -> K as generator-image dictionaries.

    The first generator is sent only to conjugacy-class representatives of
    K, so each isomorphism is produced up to inner automorphisms of K; the
    remaining generators range over all elements of matching type.
    """
    if h.order != k.order:
        return
    if h.order == 1:
        yield {}
        return
    gens = list(h.small_generators)
    gen_codes = np.array([g.code for g in gens], dtype=np.int64)
    h_types = _element_types(h)[h.positions(gen_codes)]
    k_types = _element_types(k)
    class_reps = np.array([orbit[0] for orbit in conjugacy_classes(k)], dtype=np.int64)

    candidates = []
    for i, t in enumerate(h_types):
        pool = k.codes[k_types == t]
        if i == 0:
            pool = pool[_member(class_reps, pool)]
        if pool.size == 0:
            return
        candidates.append(pool)

    h_orders = h.element_orders
    k_orders = k.element_orders

    def consistent(depth: int, chosen: List[int]) -> bool:
        # products of the newest generator with the earlier ones keep their order
        x = gen_codes[depth]
        y = chosen[depth]
        for j in range(depth):
            hp = multiply(gen_codes[j], x, h.modulus)
            kp = multiply(chosen[j], y, k.modulus)
            if (h_orders[h.positions([hp])[0]] != k_orders[k.positions([kp])[0]]):
                return False
        return True

    chosen: List[int] = []

    def search(depth: int):
        if depth == len(gens):
            images = np.array(chosen, dtype=np.int64)
            if _homomorphism_images(h, gen_codes, images, k.modulus) is not None:
                yield {g: GL2Element.from_code(int(c), k.modulus)
                       for g, c in zip(gens, images)}
            return
        for y in candidates[depth]:
            chosen.append(int(y))
            if consistent(depth, chosen):
                yield from search(depth + 1)
            chosen.pop()

    yield from search(0)


def are_isomorphic(h: Subgroup, k: Subgroup) -> bool:
    """
    Abstract isomorphism test (the moduli may differ).

    Fingerprints and the (order, centraliser) type histogram are compared
    first; only then is an explicit generator-image search run.
    """
    if h.order != k.order:
        return False
    if order_histogram(h) != order_histogram(k):
        return False
    if fingerprint(h) != fingerprint(k):
        return False
    if (sorted(Counter(_element_types(h).tolist()).items())
            != sorted(Counter(_element_types(k).tolist()).items())):
        return False
    return next(isomorphisms(h, k), None) is not None


# ---------------------------------------------------------------------------
# Fixed spaces
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _vectors(modulus: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, y = np.meshgrid(np.arange(modulus), np.arange(modulus), indexing='ij')
    x, y = x.ravel(), y.ravel()
    vector_orders = modulus // np.gcd(np.gcd(x, y), modulus)
    return x, y, vector_orders


def fixed_space_signatures(codes, modulus: int) -> np.ndarray:
    """
    Structure of ker(g - 1) on (Z/N)^2 for each g, encoded as
    size * (N^2 + 1) + exponent.
    """
    a, b, c, d = decode(codes, modulus)
    x, y, vector_orders = _vectors(modulus)
    fixed = ((((a - 1)[:, None] * x + b[:, None] * y) % modulus == 0)
             & ((c[:, None] * x + (d - 1)[:, None] * y) % modulus == 0))
    sizes = fixed.sum(axis=1)
    exponents = np.where(fixed, vector_orders, 1).max(axis=1)
    return sizes * (modulus * modulus + 1) + exponents


def signature_of_structure(d1: int, d2: int, modulus: int) -> int:
    """Signature of Z/gcd(d1,N) x Z/gcd(d2,N), matching fixed_space_signatures."""
    small, large = gcd(d1, modulus), gcd(d2, modulus)
    return small * large * (modulus * modulus + 1) + large
