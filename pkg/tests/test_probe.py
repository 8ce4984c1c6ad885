"""
Tests for Frobenius sampling, split sets and verdicts.
"""

import unittest
from types import SimpleNamespace
from unittest import mock

from sympy import primerange

from src.core.curve import COUNTING_BOUND, RationalCurve
from src.core.errors import NoPrimesError
from src.core.probe import (Verdict, coincide_heuristic, coincidence_obstruction,
                            cyclotomic_bound, cyclotomic_containment, partition_primes,
                            probe_image, split_residue_subgroup, split_set)


class TestPrimeSelection(unittest.TestCase):
    """Good primes and split sets."""

    def setUp(self):
        # full rational 2-torsion, bad reduction only at 2
        self.curve = RationalCurve.parse("-1,0")

    def test_partition_primes(self):
        used, skipped = partition_primes(self.curve, 20, level=3)
        self.assertEqual(used, [5, 7, 11, 13, 17, 19])
        self.assertEqual(skipped, [2, 3])

    def test_level_two_splits_everywhere(self):
        self.assertEqual(split_set(self.curve, 2, 100), list(primerange(3, 101)))

    def test_congruence_filter(self):
        primes = split_set(self.curve, 2, 100, congruence=(4, 3))
        self.assertTrue(primes)
        self.assertTrue(all(p % 4 == 3 for p in primes))

    def test_level_four_needs_one_mod_four(self):
        """Q(i) lies in Q(E[4]), so split primes at 4 are 1 mod 4."""
        primes = split_set(self.curve, 4, 1000)
        self.assertTrue(all(p % 4 == 1 for p in primes))
        self.assertEqual(split_residue_subgroup(self.curve, 4, 4, 1000), [1])

    def test_bound_is_capped(self):
        with self.assertRaises(ValueError):
            split_set(self.curve, 2, COUNTING_BOUND + 1)


class TestProbableImage(unittest.TestCase):
    """Sieving admissible subgroups."""

    def setUp(self):
        self.curve = RationalCurve.parse("-1,0")

    def test_trivial_mod2_image(self):
        image = probe_image(self.curve, 2, bound=200)
        self.assertTrue(image.consistent)
        self.assertEqual([g.order for g in image.minimal_survivors], [1])
        self.assertEqual(image.observed_dets(), [1])
        self.assertFalse(image.insufficient_sampling)
        self.assertEqual(image.primes_skipped, [2])
        self.assertEqual(list(image.to_dataframe().columns), ['label', 'order', 'generators'])

    def test_no_primes(self):
        with self.assertRaises(NoPrimesError):
            probe_image(self.curve, 2, bound=2)


class TestVerdicts(unittest.TestCase):
    """Coincidence and cyclotomic-containment verdicts."""

    def setUp(self):
        self.curve = RationalCurve.parse("-1,0")

    def test_unequal_with_witness(self):
        """Q(E[2]) = Q while Q(E[4]) contains Q(i): 3 splits only at level 2."""
        verdict = coincide_heuristic(self.curve, 2, 4, bound=100)
        self.assertIs(verdict.verdict, Verdict.UNEQUAL)
        self.assertTrue(verdict.rigorous)
        self.assertEqual((verdict.witness, verdict.witness_level), (3, 2))
        self.assertEqual(verdict.to_dict()['verdict'], "unequal-with-witness")

    def test_heuristic_equality(self):
        curve = RationalCurve.parse("0,0,0,13,-34")
        verdict = coincide_heuristic(curve, 2, 4, bound=1000)
        self.assertIs(verdict.verdict, Verdict.HEURISTICALLY_EQUAL)
        self.assertIsNone(verdict.witness)
        self.assertGreaterEqual(verdict.common, 5)
        self.assertTrue(verdict.to_dict()['heuristic'])
        self.assertFalse(any("differ" in note for note in verdict.notes))

    def test_cross_check_downgrades_on_image_mismatch(self):
        curve = RationalCurve.parse("0,0,0,13,-34")
        images = [SimpleNamespace(minimal_survivors=[SimpleNamespace(order=2)]),
                  SimpleNamespace(minimal_survivors=[SimpleNamespace(order=6)])]
        with mock.patch('src.core.probe.probe_image', side_effect=images) as probe:
            verdict = coincide_heuristic(curve, 2, 4, bound=1000)
        self.assertEqual(probe.call_count, 2)
        self.assertIs(verdict.verdict, Verdict.INCONCLUSIVE)
        self.assertIn("minimal survivor orders differ: [2] vs [6]", verdict.notes)

    def test_cross_check_can_be_skipped(self):
        curve = RationalCurve.parse("0,0,0,13,-34")
        with mock.patch('src.core.probe.probe_image') as probe:
            verdict = coincide_heuristic(curve, 2, 4, bound=1000, cross_check=False)
        probe.assert_not_called()
        self.assertIs(verdict.verdict, Verdict.HEURISTICALLY_EQUAL)

    def test_threshold_not_met(self):
        curve = RationalCurve.parse("0,0,0,13,-34")
        verdict = coincide_heuristic(curve, 2, 4, bound=30, threshold=1000)
        self.assertIs(verdict.verdict, Verdict.INCONCLUSIVE)
        self.assertTrue(verdict.notes)

    def test_equal_levels_rejected(self):
        with self.assertRaises(ValueError):
            coincide_heuristic(self.curve, 4, 4)

    def test_containment_pass_and_fail(self):
        passed = cyclotomic_containment(self.curve, 4, 4, bound=2000)
        self.assertIs(passed.verdict, Verdict.PASS)
        self.assertIsNone(passed.counterexample)

        failed = cyclotomic_containment(self.curve, 4, 3, bound=2000)
        self.assertIs(failed.verdict, Verdict.FAIL)
        self.assertNotEqual(failed.counterexample % 3, 1)
        self.assertEqual(failed.to_dict()['verdict'], "fail")

    def test_containment_fails_with_prime(self):
        curve = RationalCurve.parse("0,0,1,-1,0")
        result = cyclotomic_containment(curve, 3, 5, bound=10 ** 4)
        self.assertIs(result.verdict, Verdict.FAIL)
        self.assertIn(result.counterexample, result.witnesses)
        self.assertEqual(result.counterexample % 3, 1)

    def test_root_must_be_prime_power(self):
        with self.assertRaises(ValueError):
            cyclotomic_containment(self.curve, 4, 6)


class TestArithmetic(unittest.TestCase):
    """Curve-free bounds and obstructions."""

    def test_cyclotomic_bound(self):
        cases = {(2, 1, 3): 2, (3, 1, 2): 5, (3, 1, 5): 1, (3, 1, 7): 1, (3, 1, 11): 0,
                 (5, 1, 7): 1, (7, 1, 5): 1}
        for (p, n, q), expected in cases.items():
            with self.subTest(p=p, n=n, q=q):
                self.assertEqual(cyclotomic_bound(p, n, q), expected)

    def test_cyclotomic_bound_rejects(self):
        for args in ((4, 1, 3), (3, 1, 3), (3, 0, 5)):
            with self.subTest(args=args):
                with self.assertRaises(ValueError):
                    cyclotomic_bound(*args)

    def test_obstruction(self):
        self.assertFalse(coincidence_obstruction(5, 3).obstructed)
        self.assertFalse(coincidence_obstruction(7, 9).obstructed)
        self.assertFalse(coincidence_obstruction(3, 4).obstructed)
        blocked = coincidence_obstruction(5, 9)
        self.assertEqual((blocked.prime, blocked.exponent), (3, 2))
        self.assertEqual(str(blocked), "obstructed(3,2)")
        self.assertEqual(str(coincidence_obstruction(7, 5)), "obstructed(5,1)")
        self.assertEqual(str(coincidence_obstruction(3, 10)), "obstructed(5,1)")
        self.assertEqual(str(coincidence_obstruction(2, 3)), "obstructed(3,1)")
        with self.assertRaises(ValueError):
            coincidence_obstruction(5, 1)


if __name__ == '__main__':
    unittest.main()
