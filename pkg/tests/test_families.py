"""
Tests for parametrised families and the CM exclusion scan.
"""

import unittest

from sympy import Rational

from src.core.errors import PoleError, SingularCurveError
from src.core.families import (CM_J_INVARIANTS, FamilyId, cm_exclusion_scan, curve_with_j,
                               get_family, instantiate, j_preimages, j_value, rational_roots)


class TestFamilyLookup(unittest.TestCase):

    def test_by_value(self):
        family = get_family("mod4g-jline")
        self.assertIs(family.family_id, FamilyId.MOD4G_JLINE)
        self.assertFalse(family.is_curve_family)
        self.assertIs(get_family(family), family)

    def test_unknown(self):
        with self.assertRaises(ValueError):
            get_family("no-such-family")

    def test_polynomials(self):
        self.assertEqual(set(get_family(FamilyId.ABELIAN_2_4).polynomials()), {'a4', 'a6'})
        self.assertEqual(set(get_family(FamilyId.MOD4G_JLINE).polynomials()),
                         {'j_numerator', 'j_denominator'})


class TestInstantiation(unittest.TestCase):
    """Curves and j-values at a parameter."""

    def test_curve_family(self):
        curve = instantiate(FamilyId.ABELIAN_2_4, 1)
        self.assertEqual((curve.a4, curve.a6), (1053, 24786))
        self.assertEqual(j_value(FamilyId.ABELIAN_2_4, 1), curve.j_invariant)

    def test_singular_member(self):
        with self.assertRaises(SingularCurveError):
            instantiate(FamilyId.HORIZONTAL_2_3, 0)

    def test_j_line(self):
        self.assertEqual(j_value(FamilyId.MOD4G_JLINE, 1), -36)
        self.assertEqual(j_value("mod4g-jline", "1"), j_value(FamilyId.MOD4G_JLINE, Rational(1)))

    def test_pole(self):
        with self.assertRaises(PoleError):
            j_value(FamilyId.MOD4G_JLINE, -1)

    def test_j_map_only_family(self):
        with self.assertRaises(ValueError):
            instantiate(FamilyId.MOD4G_JLINE, 1)

    def test_reference_model_has_family_j(self):
        for t in (1, 2, Rational(1, 3)):
            with self.subTest(t=t):
                curve = instantiate(FamilyId.MOD4G_REFERENCE, t)
                self.assertEqual(curve.j_invariant, j_value(FamilyId.MOD4G_REFERENCE, t))

    def test_curve_with_j(self):
        self.assertEqual(curve_with_j(Rational(1, 2)).j_invariant, Rational(1, 2))
        for j in (0, 1728):
            with self.subTest(j=j):
                with self.assertRaises(SingularCurveError):
                    curve_with_j(j)


class TestRationalRoots(unittest.TestCase):

    def test_roots(self):
        cases = [
            ([1, 0, -1], [-1, 1]),
            ([2, -1], [Rational(1, 2)]),
            ([1, -3, 2, 0], [0, 1, 2]),
            ([1, 0, 1], []),
            ([0, 0, 4, -2], [Rational(1, 2)]),
        ]
        for coeffs, expected in cases:
            with self.subTest(coeffs=coeffs):
                self.assertEqual(rational_roots(coeffs), expected)

    def test_zero_polynomial(self):
        with self.assertRaises(ValueError):
            rational_roots([0, 0])

    def test_preimages(self):
        self.assertIn(Rational(1), j_preimages(FamilyId.MOD4G_JLINE, -36))
        with self.assertRaises(ValueError):
            j_preimages(FamilyId.ABELIAN_2_4, 0)


class TestCMExclusion(unittest.TestCase):
    """No CM j-invariant on the mod-4 j-line."""

    def test_small_scan(self):
        report = cm_exclusion_scan(j_values=(0, 1728))
        self.assertEqual(len(report.entries), 3)
        self.assertTrue(report.entries[-1].control)
        self.assertTrue(report.control_found)
        self.assertEqual(list(report.to_dataframe().columns),
                         ['j0', 'control', 'rational_roots', 'excluded'])

    def test_planted_value_is_caught(self):
        report = cm_exclusion_scan(j_values=(-36,), control_t=None)
        self.assertFalse(report.all_excluded)

    def test_full_scan(self):
        report = cm_exclusion_scan(jobs=2)
        self.assertEqual(len(report.entries), len(CM_J_INVARIANTS) + 1)
        self.assertTrue(report.all_excluded)
        self.assertTrue(report.control_found)


if __name__ == '__main__':
    unittest.main()
