"""
Randomised property checks with fixed seeds.

Each suite draws 1000 cases. The point-brute-force, sampling and
classification suites are slow; set ECL_SLOW_TESTS=1 to include them.
"""

import os
import random
import unittest

from sympy import primerange

from src.core.curve import (curve_from_coeffs, frobenius_data, frobenius_trace,
                            has_good_reduction, reduce_curve, valid_structure)
from src.core.enumeration import enumerate_subgroups
from src.core.errors import SingularCurveError
from src.core.groups import conjugate, full_group
from src.core.menagerie import classify_subgroup
from src.core.modring import GL2Element, reduce
from src.core.probe import probe_image

SLOW = bool(os.environ.get('ECL_SLOW_TESTS'))
CASES = 1000


def random_curve(rng: random.Random, span: int):
    while True:
        try:
            return curve_from_coeffs([rng.randint(-span, span), rng.randint(-span, span)])
        except SingularCurveError:
            continue


def random_good_prime(rng: random.Random, curve, primes):
    while True:
        prime = rng.choice(primes)
        if has_good_reduction(curve, prime):
            return prime


def random_element(rng: random.Random, modulus: int) -> GL2Element:
    while True:
        try:
            return GL2Element(modulus, *(rng.randrange(modulus) for _ in range(4)))
        except ValueError:
            continue


class TestFrobeniusProperties(unittest.TestCase):
    """Point counts over random curves and primes."""

    def test_hasse_bound(self):
        rng = random.Random(20261017)
        primes = [int(p) for p in primerange(5, 200)]
        for case in range(CASES):
            curve = random_curve(rng, 50)
            prime = random_good_prime(rng, curve, primes)
            trace = frobenius_trace(curve, prime)
            with self.subTest(case=case, curve=str(curve), prime=prime):
                self.assertLessEqual(trace * trace, 4 * prime)

    @unittest.skipUnless(SLOW, "set ECL_SLOW_TESTS=1 for brute-force point checks")
    def test_group_structure_against_points(self):
        """Z/d1 x Z/d2 with d1 | d2: d2 kills E(F_l) and E[d1] has d1^2 points."""
        rng = random.Random(7)
        primes = [int(p) for p in primerange(5, 50)]
        for case in range(CASES):
            curve = random_curve(rng, 50)
            prime = random_good_prime(rng, curve, primes)
            data = frobenius_data(curve, prime, want_structure=True, seed=case)
            d1, d2 = data.structure
            reduced = reduce_curve(curve, prime)
            points = reduced.points()
            with self.subTest(case=case, curve=str(curve), prime=prime, structure=(d1, d2)):
                self.assertTrue(valid_structure(d1, d2, prime, data.count))
                self.assertEqual(len(points), data.count)
                self.assertTrue(all(reduced.multiply(p, d2) is None for p in points))
                killed = sum(1 for p in points if reduced.multiply(p, d1) is None)
                self.assertEqual(killed, d1 * d1)


class TestReductionHomomorphism(unittest.TestCase):
    """GL(2, Z/NZ) -> GL(2, Z/MZ) respects products."""

    def test_reduce_respects_products(self):
        rng = random.Random(424242)
        moduli = (4, 6, 8, 9, 12, 18, 24, 36)
        for case in range(CASES):
            n = rng.choice(moduli)
            m = rng.choice([k for k in range(2, n + 1) if n % k == 0])
            x, y = random_element(rng, n), random_element(rng, n)
            with self.subTest(case=case, n=n, m=m, x=str(x), y=str(y)):
                self.assertEqual(reduce(x * y, m), reduce(x, m) * reduce(y, m))
                self.assertEqual(reduce(x.inverse(), m), reduce(x, m).inverse())
                self.assertEqual(reduce(x, m).det, x.det % m)


@unittest.skipUnless(SLOW, "set ECL_SLOW_TESTS=1 for sampling and classification")
class TestSampledImages(unittest.TestCase):
    """Observed Frobenius types and conjugation-invariant classification."""

    def test_observed_dets_match_primes(self):
        """det(Frob_l) = l mod n and tr(Frob_l) = a_l mod n for every recorded prime."""
        rng = random.Random(1729)
        checked = 0
        while checked < CASES:
            curve = random_curve(rng, 20)
            n = rng.choice((2, 3, 4))
            image = probe_image(curve, n, bound=400, structured=False)
            for (trace, det, _), primes in image.observed.items():
                for prime in primes:
                    with self.subTest(curve=str(curve), n=n, prime=prime):
                        self.assertEqual(prime % n, det)
                        self.assertEqual(frobenius_trace(curve, prime) % n, trace)
                    checked += 1
            self.assertEqual(sorted(p for ps in image.observed.values() for p in ps),
                             image.primes_used)

    def test_classification_is_conjugation_invariant(self):
        rng = random.Random(99)
        representatives = {p: enumerate_subgroups(p) for p in (3, 5)}
        codes = {p: full_group(p).codes for p in (3, 5)}
        expected = {(p, i): classify_subgroup(group)
                    for p, groups in representatives.items() for i, group in enumerate(groups)}
        for case in range(CASES):
            p = rng.choice((3, 5))
            index = rng.randrange(len(representatives[p]))
            g = GL2Element.from_code(int(rng.choice(codes[p])), p)
            moved = conjugate(representatives[p][index], g)
            with self.subTest(case=case, p=p, index=index, g=str(g)):
                self.assertEqual(classify_subgroup(moved), expected[(p, index)])


if __name__ == '__main__':
    unittest.main()
