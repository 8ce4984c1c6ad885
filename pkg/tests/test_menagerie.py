"""
Tests for named groups and the mod-p classification.
"""

import unittest

from src.core.errors import ModulusError
from src.core.groups import abelian_invariants, are_conjugate, full_group
from src.core.menagerie import (GroupClass, NamedGroupId, cc_witness, classify_subgroup,
                                determinant_surjective, has_cc_element, is_admissible,
                                least_nonresidue, named_group)


def named(text: str):
    return named_group(NamedGroupId.parse(text))


class TestNamedGroupId(unittest.TestCase):
    """Parsing and validation of identifiers."""

    def test_parse(self):
        group_id = NamedGroupId.parse("Borel( 5 )")
        self.assertEqual(group_id, NamedGroupId('Borel', (5,)))
        self.assertEqual(str(group_id), "Borel(5)")
        self.assertEqual(str(NamedGroupId.parse("H13")), "H13")

    def test_invalid(self):
        for text in ("Nope(3)", "Borel", "H5(2)", "Borel(x)", "Borel(5"):
            with self.subTest(text=text):
                with self.assertRaises(ValueError):
                    NamedGroupId.parse(text)


class TestNamedGroups(unittest.TestCase):
    """Orders and structure of the catalogue."""

    def test_cartan_family_orders(self):
        for p in (3, 5, 7):
            with self.subTest(p=p):
                self.assertEqual(named(f"Borel({p})").order, p * (p - 1) ** 2)
                self.assertEqual(named(f"SplitCartan({p})").order, (p - 1) ** 2)
                self.assertEqual(named(f"SplitCartanNormalizer({p})").order, 2 * (p - 1) ** 2)
                self.assertEqual(named(f"NonsplitCartan({p})").order, p * p - 1)
                self.assertEqual(named(f"NonsplitCartanNormalizer({p})").order,
                                 2 * (p * p - 1))

    def test_nonsplit_needs_a_nonresidue(self):
        with self.assertRaises(ValueError):
            named_group(NamedGroupId('NonsplitCartan', (5, 4)))
        self.assertEqual(named("NonsplitCartan(5,3)").order, 24)

    def test_small_named_groups(self):
        expected = {'Cns2': 3, 'B3': 12, 'Mod4G': 6, 'Mod4H': 2, 'Mod6H1': 6, 'Mod6H2': 6,
                    'Curve32a3Level(3)': 32, 'Curve32a3Level(1)': 2}
        for text, order in expected.items():
            with self.subTest(group=text):
                group = named(text)
                self.assertEqual(group.order, order)
                self.assertEqual(group.label, text)

    def test_mod6_groups_are_not_conjugate(self):
        self.assertFalse(are_conjugate(named("Mod6H1"), named("Mod6H2"))[0])

    def test_exceptional_abelianisations(self):
        self.assertEqual(abelian_invariants(named("H5")).as_list(), [4])
        self.assertEqual(abelian_invariants(named("H13")).as_list(), [12])

    def test_least_nonresidue(self):
        for p, e in ((3, 2), (5, 2), (7, 3), (13, 2), (17, 3)):
            with self.subTest(p=p):
                self.assertEqual(least_nonresidue(p), e)


class TestPredicates(unittest.TestCase):
    """Admissibility."""

    def test_full_group_is_admissible(self):
        for modulus in (2, 3, 4, 5, 6):
            with self.subTest(modulus=modulus):
                self.assertTrue(is_admissible(full_group(modulus)))

    def test_cc_witness(self):
        witness = cc_witness(full_group(5))
        self.assertEqual((witness.trace, witness.det), (0, 4))

    def test_nonsplit_cartan_mod5_has_no_cc_element(self):
        """-1 is not a norm of a trace-zero element when 1/2 is a non-residue."""
        cartan = named("NonsplitCartan(5)")
        self.assertTrue(determinant_surjective(cartan))
        self.assertFalse(has_cc_element(cartan))
        self.assertFalse(is_admissible(cartan))

    def test_split_cartan_is_admissible(self):
        self.assertTrue(is_admissible(named("SplitCartan(5)")))


class TestClassification(unittest.TestCase):
    """Maximal-subgroup taxonomy mod p."""

    def test_classes(self):
        cases = [
            ("Borel(5)", GroupClass.BOREL),
            ("SplitCartanNormalizer(5)", GroupClass.SPLIT_NORMALIZER),
            ("NonsplitCartanNormalizer(5)", GroupClass.NONSPLIT_NORMALIZER),
            ("NonsplitCartanNormalizer(3)", GroupClass.NONSPLIT_NORMALIZER),
            ("H5", GroupClass.EXCEPTIONAL),
            ("H13", GroupClass.EXCEPTIONAL),
        ]
        for text, expected in cases:
            with self.subTest(group=text):
                self.assertIs(classify_subgroup(named(text)), expected)
        self.assertIs(classify_subgroup(full_group(7)), GroupClass.FULL)

    def test_composite_modulus_rejected(self):
        with self.assertRaises(ModulusError):
            classify_subgroup(full_group(4))


if __name__ == '__main__':
    unittest.main()
