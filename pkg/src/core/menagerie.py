"""
Named subgroups of GL(2, Z/NZ) and the maximal-subgroup taxonomy mod p.
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from sympy import isprime, legendre_symbol, primitive_root, totient

from .errors import ModulusError
from .groups import (Subgroup, full_group, generate_subgroup, is_conjugate_into,
                     isomorphisms, projective_order_histogram, reduce_codes,
                     traces_and_dets)
from .modring import GL2Element, crt_combine, modulus_ceiling

logger = logging.getLogger(__name__)

# name -> allowed parameter counts
_NAMES = {
    'Borel': (1,),
    'SplitCartan': (1,),
    'SplitCartanNormalizer': (1,),
    'NonsplitCartan': (1, 2),
    'NonsplitCartanNormalizer': (1, 2),
    'H5': (0,),
    'H13': (0,),
    'B3': (0,),
    'Nns3': (0,),
    'Cns2': (0,),
    'Mod4G': (0,),
    'Mod4H': (0,),
    'Mod6H1': (0,),
    'Mod6H2': (0,),
    'Mod12H1pi4': (0,),
    'Mod12H2pi4': (0,),
    'Mod12Htilde_pi4': (0,),
    'Curve32a3Level': (1,),
}

# element-order histogram of S4
S4_ORDER_HISTOGRAM = {1: 1, 2: 9, 3: 8, 4: 6}

# mod-4 components of the mod-12 groups; the mod-3 component is N_s(3)
MOD12_PI4_GENERATORS = {
    'Mod12H1pi4': ("3,3;0,1", "1,3;2,1"),
    'Mod12H2pi4': ("1,1;0,3", "1,3;2,1"),
    'Mod12Htilde_pi4': ("3,0;0,3", "3,3;0,1", "1,3;2,1"),
}


class GroupClass(Enum):
    FULL = "FullGL2"
    BOREL = "BorelContained"
    SPLIT_NORMALIZER = "SplitNormalizerContained"
    NONSPLIT_NORMALIZER = "NonsplitNormalizerContained"
    EXCEPTIONAL = "Exceptional"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class NamedGroupId:
    """Identifier of a named group, e.g. NamedGroupId('Borel', (5,))."""

    name: str
    params: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'params', tuple(int(p) for p in self.params))
        if self.name not in _NAMES:
            raise ValueError(f"Unknown named group: {self.name}")
        if len(self.params) not in _NAMES[self.name]:
            raise ValueError(f"{self.name} takes {_NAMES[self.name]} parameter(s), "
                             f"got {len(self.params)}")

    @classmethod
    def parse(cls, text: str) -> 'NamedGroupId':
        match = re.fullmatch(r"\s*(\w+)\s*(?:\(([^)]*)\))?\s*", text)
        if not match:
            raise ValueError(f"Cannot parse group id '{text}'")
        raw = match.group(2)
        try:
            params = tuple(int(v) for v in raw.split(',')) if raw and raw.strip() else ()
        except ValueError:
            raise ValueError(f"Group id '{text}' has a non-integer parameter") from None
        return cls(match.group(1), params)

    def __str__(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}({','.join(str(p) for p in self.params)})"


def least_nonresidue(p: int) -> int:
    for e in range(2, p):
        if legendre_symbol(e, p) == -1:
            return e
    raise ValueError(f"No quadratic non-residue mod {p}")


def _require_prime(p: int) -> int:
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    return p


def _gens(modulus: int, *texts: str):
    return [GL2Element.parse(t, modulus) for t in texts]


def _nonsplit_elements(p: int, eps: int):
    return [GL2Element(p, a, eps * b, b, a)
            for a in range(p) for b in range(p) if (a, b) != (0, 0)]


def _graph_of_isomorphism(mod4: Subgroup, mod3: Subgroup, label: str) -> Subgroup:
    """First admissible graph of an isomorphism mod4 -> mod3, as a mod-12 group."""
    for mapping in isomorphisms(mod4, mod3):
        gens = [crt_combine([g, image]) for g, image in mapping.items()]
        graph = generate_subgroup(12, gens, label=label)
        if graph.order == mod4.order and is_admissible(graph):
            return graph
    raise RuntimeError(f"No admissible graph for {label}")


def mod12_pi4_image(name: str) -> Subgroup:
    """The prescribed reduction mod 4 of one of the mod-12 groups."""
    if name not in MOD12_PI4_GENERATORS:
        raise ValueError(f"{name} is not a mod-12 group")
    return generate_subgroup(4, _gens(4, *MOD12_PI4_GENERATORS[name]), label=f"pi4({name})")


@lru_cache(maxsize=None)
def named_group(group_id: NamedGroupId) -> Subgroup:
    """
    Build a named group from its generator matrices or defining element set.

    Args:
        group_id: Identifier (see NamedGroupId)

    Returns:
        The subgroup, labelled with str(group_id)
    """
    name, params = group_id.name, group_id.params
    label = str(group_id)

    if name == 'Borel':
        p = _require_prime(params[0])
        g = primitive_root(p) if p > 2 else 1
        return generate_subgroup(p, [GL2Element(p, 1, 1, 0, 1), GL2Element(p, g, 0, 0, 1),
                                     GL2Element(p, 1, 0, 0, g)], label=label)
    if name == 'SplitCartan':
        p = _require_prime(params[0])
        return Subgroup.from_elements([GL2Element(p, a, 0, 0, d) for a in range(1, p)
                                       for d in range(1, p)], p, label=label)
    if name == 'SplitCartanNormalizer':
        p = _require_prime(params[0])
        g = primitive_root(p) if p > 2 else 1
        return generate_subgroup(p, [GL2Element(p, g, 0, 0, 1), GL2Element(p, 1, 0, 0, g),
                                     GL2Element(p, 0, 1, 1, 0)], label=label)
    if name in ('NonsplitCartan', 'NonsplitCartanNormalizer'):
        p = _require_prime(params[0])
        if p == 2:
            cns = named_group(NamedGroupId('Cns2'))
            if name == 'NonsplitCartan':
                return cns
            return generate_subgroup(2, list(cns.generators) + [GL2Element(2, 0, 1, 1, 0)],
                                     label=label)
        eps = params[1] if len(params) > 1 else least_nonresidue(p)
        if legendre_symbol(eps % p, p) != -1:
            raise ValueError(f"{eps} is not a quadratic non-residue mod {p}")
        cartan = _nonsplit_elements(p, eps)
        if name == 'NonsplitCartan':
            return Subgroup.from_elements(cartan, p, label=label)
        flip = GL2Element(p, -1, 0, 0, 1)
        return Subgroup.from_elements(cartan + [flip * c for c in cartan], p, label=label)

    if name == 'H5':
        return generate_subgroup(5, _gens(5, "1,4;1,1", "1,0;0,2"), label=label)
    if name == 'H13':
        return generate_subgroup(13, _gens(13, "1,12;1,1", "1,0;0,8"), label=label)
    if name == 'B3':
        return generate_subgroup(3, _gens(3, "1,1;0,1", "2,0;0,1", "1,0;0,2"), label=label)
    if name == 'Nns3':
        return generate_subgroup(3, _gens(3, "1,0;0,2", "2,1;2,2"), label=label)
    if name == 'Cns2':
        return generate_subgroup(2, _gens(2, "0,1;1,1"), label=label)
    if name == 'Mod4G':
        return generate_subgroup(4, _gens(4, "1,0;3,3", "3,3;1,0"), label=label)
    if name == 'Mod4H':
        return generate_subgroup(4, _gens(4, "1,1;0,3"), label=label)
    if name == 'Mod6H1':
        return generate_subgroup(6, _gens(6, "5,5;0,1", "2,5;1,3"), label=label)
    if name == 'Mod6H2':
        return generate_subgroup(6, _gens(6, "1,1;0,5", "2,5;1,3"), label=label)

    if name in ('Mod12H1pi4', 'Mod12H2pi4'):
        mod3 = named_group(NamedGroupId('SplitCartanNormalizer', (3,)))
        return _graph_of_isomorphism(mod12_pi4_image(name), mod3, label)
    if name == 'Mod12Htilde_pi4':
        mod4 = mod12_pi4_image(name)
        mod3 = named_group(NamedGroupId('SplitCartanNormalizer', (3,)))
        ambient = full_group(12)
        inside = (mod4.contains_codes(reduce_codes(ambient.codes, 12, 4))
                  & mod3.contains_codes(reduce_codes(ambient.codes, 12, 3)))
        return Subgroup(12, ambient.codes[inside], label=label)

    if name == 'Curve32a3Level':
        n = params[0]
        if not 1 <= n <= 8:
            raise ValueError(f"Curve32a3Level needs 1 <= n <= 8, got {n}")
        modulus = 2 ** n
        if modulus == 2:
            # A and B are trivial mod 2
            return generate_subgroup(2, _gens(2, "1,1;0,1"), label=label)
        with modulus_ceiling(modulus):
            return generate_subgroup(modulus, _gens(modulus, "-1,0;0,1", "5,0;0,5",
                                                    "-1,-1;4,-1"), label=label)
    raise ValueError(f"Unknown named group: {group_id}")


def cc_witness(group: Subgroup) -> Optional[GL2Element]:
    """First element (in code order) with trace 0 and det -1."""
    traces, dets = traces_and_dets(group.codes, group.modulus)
    hits = np.flatnonzero((traces == 0) & (dets == group.modulus - 1))
    if hits.size == 0:
        return None
    return GL2Element.from_code(int(group.codes[hits[0]]), group.modulus)


def has_cc_element(group: Subgroup) -> bool:
    return cc_witness(group) is not None


def determinant_surjective(group: Subgroup) -> bool:
    return group.determinant_image().size == int(totient(group.modulus))


def is_admissible(group: Subgroup) -> bool:
    """Surjective determinant and an element of trace 0, det -1."""
    return determinant_surjective(group) and has_cc_element(group)


def classify_subgroup(group: Subgroup) -> GroupClass:
    """
    Place a mod-p group in the maximal-subgroup taxonomy.

    Containment of a conjugate is tested against Borel, split normalizer and
    non-split normalizer in that order; exceptional means a projective
    quotient of order 24 with the element orders of S4.

    Raises:
        ModulusError: If the modulus is not prime
    """
    p = group.modulus
    if not isprime(p):
        raise ModulusError(f"classify_subgroup needs a prime modulus, got {p}")
    if group.order == full_group(p).order:
        return GroupClass.FULL
    for name, result in (('Borel', GroupClass.BOREL),
                         ('SplitCartanNormalizer', GroupClass.SPLIT_NORMALIZER),
                         ('NonsplitCartanNormalizer', GroupClass.NONSPLIT_NORMALIZER)):
        if is_conjugate_into(group, named_group(NamedGroupId(name, (p,)))) is not None:
            return result
    projective, histogram = projective_order_histogram(group)
    if projective == 24 and histogram == S4_ORDER_HISTOGRAM:
        return GroupClass.EXCEPTIONAL
    return GroupClass.UNCLASSIFIED
