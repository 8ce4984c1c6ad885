"""
Core group-theory, elliptic-curve and verification functionality.
"""

from .modring import GL2Element, CharPoly
from .groups import Subgroup, AbelianInvariants, generate_subgroup, abelian_invariants
from .enumeration import SubgroupFilter, enumerate_subgroups
from .menagerie import NamedGroupId, named_group, classify_subgroup
from .curve import RationalCurve, frobenius_data
from .probe import probe_image, coincide_heuristic, cyclotomic_containment
from .families import FamilyId, instantiate, j_value
from .verification import VerificationReport, run_claim, run_suite

__all__ = ['GL2Element', 'CharPoly', 'Subgroup', 'AbelianInvariants', 'generate_subgroup',
           'abelian_invariants', 'SubgroupFilter', 'enumerate_subgroups', 'NamedGroupId',
           'named_group', 'classify_subgroup', 'RationalCurve', 'frobenius_data',
           'probe_image', 'coincide_heuristic', 'cyclotomic_containment', 'FamilyId',
           'instantiate', 'j_value', 'VerificationReport', 'run_claim', 'run_suite']
