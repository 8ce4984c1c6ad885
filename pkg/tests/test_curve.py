"""
Basic tests for the elliptic-curve functionality.
"""

import unittest

from sympy import Poly, Rational, symbols

from src.core.curve import (RationalCurve, add_points, curve_from_coeffs, division_polynomial,
                            frobenius_data, group_structure, has_good_reduction,
                            is_isomorphic, multiply_point, on_curve, point_order,
                            quadratic_twist, rational_torsion, reduce_curve, valid_structure)
from src.core.errors import BadReductionError, SingularCurveError


class TestRationalCurve(unittest.TestCase):
    """Test cases for RationalCurve."""

    def setUp(self):
        """Set up test data."""
        self.congruent = RationalCurve.parse("-1,0")   # y^2 = x^3 - x
        self.six_torsion = RationalCurve.parse("0,1")  # y^2 = x^3 + 1

    def test_parse_forms(self):
        """Short and long coefficient lists."""
        long_form = RationalCurve.parse("0, 0, 0, -1, 0")
        self.assertEqual(long_form, self.congruent)
        self.assertEqual(RationalCurve.parse("1/2,3").a4, Rational(1, 2))
        self.assertEqual(curve_from_coeffs([-1, 0]), self.congruent)
        for bad in ("1,2,3", "a,b", "1,,2"):
            with self.subTest(text=bad):
                with self.assertRaises(ValueError):
                    RationalCurve.parse(bad)

    def test_singular(self):
        """Zero discriminant raises SingularCurveError."""
        for text in ("0,0", "-3,2"):
            with self.subTest(text=text):
                with self.assertRaises(SingularCurveError):
                    RationalCurve.parse(text)

    def test_invariants(self):
        self.assertEqual(self.congruent.discriminant, 64)
        self.assertEqual(self.congruent.j_invariant, 1728)
        self.assertEqual(self.six_torsion.j_invariant, 0)

    def test_point_arithmetic(self):
        """Group law on the rational 6-torsion of y^2 = x^3 + 1."""
        p = (Rational(2), Rational(3))
        self.assertTrue(on_curve(self.six_torsion, p))
        self.assertEqual(point_order(self.six_torsion, p), 6)
        self.assertEqual(multiply_point(self.six_torsion, p, 3), (Rational(-1), Rational(0)))
        self.assertEqual(add_points(self.six_torsion, p, None), p)
        self.assertIsNone(multiply_point(self.six_torsion, p, 6))


class TestTwistsAndIsomorphism(unittest.TestCase):
    """Quadratic twists and the isomorphism test."""

    def setUp(self):
        self.curve = RationalCurve.parse("-1,0")

    def test_twist_by_minus_one_is_isomorphic(self):
        """For j = 1728 with B = 0, twisting by -1 changes A by a fourth power."""
        self.assertTrue(is_isomorphic(self.curve, quadratic_twist(self.curve, -1)))

    def test_twist_by_two_is_not_isomorphic(self):
        twist = quadratic_twist(self.curve, 2)
        self.assertEqual(twist.j_invariant, self.curve.j_invariant)
        self.assertFalse(is_isomorphic(self.curve, twist))

    def test_different_j(self):
        self.assertFalse(is_isomorphic(self.curve, RationalCurve.parse("0,1")))

    def test_twist_by_zero(self):
        with self.assertRaises(ValueError):
            quadratic_twist(self.curve, 0)


class TestReduction(unittest.TestCase):
    """Point counts and structures over F_l."""

    def setUp(self):
        self.curve = RationalCurve.parse("-1,0")

    def test_good_reduction(self):
        self.assertFalse(has_good_reduction(self.curve, 2))
        self.assertTrue(has_good_reduction(self.curve, 3))
        with self.assertRaises(BadReductionError) as ctx:
            frobenius_data(self.curve, 2)
        self.assertEqual(ctx.exception.prime, 2)

    def test_known_trace(self):
        data = frobenius_data(self.curve, 5, want_structure=True)
        self.assertEqual((data.trace, data.count), (-2, 8))
        self.assertEqual(data.structure, (2, 4))
        self.assertTrue(data.full_torsion(2))
        self.assertFalse(data.full_torsion(4))

    def test_supersingular_primes(self):
        """a_l = 0 for l = 3 mod 4 on a j = 1728 curve."""
        for prime in (3, 7, 11, 19, 23, 31):
            with self.subTest(prime=prime):
                self.assertEqual(frobenius_data(self.curve, prime).trace, 0)

    def test_count_matches_enumeration(self):
        curve = RationalCurve.parse("0,0,0,13,-34")
        for prime in (3, 7, 11, 13, 17):
            with self.subTest(prime=prime):
                reduced = reduce_curve(curve, prime)
                self.assertEqual(reduced.count_points(), len(reduced.points()))

    def test_hasse_and_structure(self):
        curve = RationalCurve.parse("1,-1,1,4,-1")
        for prime in (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43):
            with self.subTest(prime=prime):
                data = frobenius_data(curve, prime, want_structure=True)
                self.assertLessEqual(data.trace ** 2, 4 * prime)
                d1, d2 = data.structure
                self.assertTrue(valid_structure(d1, d2, prime, data.count))

    def test_structure_is_seed_independent(self):
        reduced = reduce_curve(self.curve, 13)
        count = reduced.count_points()
        self.assertEqual(group_structure(reduced, count, seed=0),
                         group_structure(reduced, count, seed=5))


class TestDivisionPolynomials(unittest.TestCase):
    """x-division polynomials and rational torsion."""

    def test_degrees(self):
        curve = RationalCurve.parse("0,0,0,13,-34")
        for n in (2, 3, 4, 5, 6, 7, 8):
            expected = (n * n - 1) // 2 if n % 2 else (n * n + 2) // 2
            with self.subTest(n=n):
                self.assertEqual(division_polynomial(curve, n).degree, expected)

    def test_three_division_short_model(self):
        a, b = 2, 3
        curve = RationalCurve.parse(f"{a},{b}")
        x = symbols('x')
        expected = Poly(3 * x ** 4 + 6 * a * x ** 2 + 12 * b * x - a * a, x, domain='QQ')
        self.assertEqual(division_polynomial(curve, 3).poly, expected)

    def test_four_division_leading_coefficient(self):
        curve = RationalCurve.parse("2,3")
        self.assertEqual(division_polynomial(curve, 4).coefficients[0], 8)

    def test_level_range(self):
        with self.assertRaises(ValueError):
            division_polynomial(RationalCurve.parse("2,3"), 13)

    def test_rational_torsion(self):
        cases = [("-1,0", [2, 2], 4), ("0,1", [6], 6)]
        for text, structure, order in cases:
            with self.subTest(curve=text):
                torsion = rational_torsion(RationalCurve.parse(text))
                self.assertEqual(torsion.structure.as_list(), structure)
                self.assertEqual(torsion.order, order)


if __name__ == '__main__':
    unittest.main()
