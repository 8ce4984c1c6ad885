"""
Tests for GL(2, Z/NZ) element arithmetic.
"""

import random
import threading
import unittest

from src.core.errors import ModulusError
from src.core import modring
from src.core.modring import (GL2Element, charpoly, compose, crt_combine, crt_decompose,
                              current_ceiling, element_order, gl2_order, modulus_ceiling,
                              reduce)


def random_element(rng: random.Random, modulus: int) -> GL2Element:
    while True:
        try:
            return GL2Element(modulus, *(rng.randrange(modulus) for _ in range(4)))
        except ValueError:
            continue


class TestGL2Element(unittest.TestCase):
    """Construction, parsing and validation."""

    def test_entries_are_reduced(self):
        """Entries are stored in [0, N)."""
        g = GL2Element(8, -1, 9, 4, 17)
        self.assertEqual(g.entries, (7, 1, 4, 1))

    def test_singular_matrix_rejected(self):
        """A non-unit determinant raises."""
        with self.assertRaises(ValueError):
            GL2Element(6, 2, 0, 0, 1)

    def test_parse_and_str(self):
        """The 'a,b;c,d' text format parses and prints back."""
        g = GL2Element.parse(" 1, 1 ; 0, 3 ", 4)
        self.assertEqual(str(g), "1,1;0,3")
        for bad in ("1,1,0,3", "1,1;0", "1,x;0,1"):
            with self.subTest(text=bad):
                with self.assertRaises(ValueError):
                    GL2Element.parse(bad, 4)

    def test_modulus_bounds(self):
        """Moduli below 2 or above the ceiling raise ModulusError."""
        for modulus in (1, modring.MODULUS_CEILING + 1):
            with self.subTest(modulus=modulus):
                with self.assertRaises(ModulusError):
                    GL2Element.identity(modulus)

    def test_modulus_ceiling_context(self):
        """The ceiling can be raised temporarily and is restored afterwards."""
        before = current_ceiling()
        with modulus_ceiling(128) as ceiling:
            self.assertEqual(ceiling, 128)
            self.assertEqual(GL2Element(128, 5, 0, 0, 5).modulus, 128)
        self.assertEqual(current_ceiling(), before)

    def test_modulus_ceiling_is_per_thread(self):
        """A ceiling raised on a worker thread does not leak into other threads."""
        raised, release = threading.Event(), threading.Event()
        seen = []

        def worker():
            with modulus_ceiling(256):
                seen.append(current_ceiling())
                raised.set()
                release.wait(5)

        thread = threading.Thread(target=worker)
        thread.start()
        try:
            self.assertTrue(raised.wait(5))
            self.assertEqual(current_ceiling(), modring.MODULUS_CEILING)
            with self.assertRaises(ModulusError):
                GL2Element.identity(128)
        finally:
            release.set()
            thread.join()
        self.assertEqual(seen, [256])

    def test_code_round_trip(self):
        """from_code inverts the code property."""
        g = GL2Element(12, 5, 7, 2, 11)
        self.assertEqual(GL2Element.from_code(g.code, 12), g)


class TestArithmetic(unittest.TestCase):
    """Products, inverses, orders and reductions."""

    def setUp(self):
        self.rng = random.Random(7)

    def test_group_axioms(self):
        """Associativity and inverses on random elements."""
        for modulus in (2, 6, 9, 16):
            for _ in range(20):
                x, y, z = (random_element(self.rng, modulus) for _ in range(3))
                with self.subTest(modulus=modulus, x=str(x), y=str(y), z=str(z)):
                    self.assertEqual((x * y) * z, x * (y * z))
                    self.assertTrue((x * x.inverse()).is_identity)
                    self.assertEqual(compose(x, y), x * y)

    def test_det_is_multiplicative(self):
        """det(xy) = det(x) det(y)."""
        for _ in range(30):
            x, y = random_element(self.rng, 10), random_element(self.rng, 10)
            self.assertEqual((x * y).det, (x.det * y.det) % 10)

    def test_known_orders(self):
        """Orders of a few explicit elements."""
        cases = [
            (GL2Element(8, 1, 1, 0, 1), 8),
            (GL2Element(8, 1, 2, 0, 1), 4),
            (GL2Element(5, 2, 0, 0, 1), 4),
            (GL2Element(4, 1, 0, 0, 1), 1),
            (GL2Element(3, 0, 2, 1, 0), 4),
            (GL2Element(3, 0, 1, 1, 0), 2),
        ]
        for g, expected in cases:
            with self.subTest(element=str(g)):
                self.assertEqual(element_order(g), expected)
                self.assertEqual(g.order(), expected)

    def test_order_divides_group_order(self):
        """Lagrange: every order divides |GL(2, Z/NZ)|."""
        for modulus in (4, 7, 12):
            for _ in range(15):
                g = random_element(self.rng, modulus)
                order = element_order(g)
                self.assertEqual(gl2_order(modulus) % order, 0)
                self.assertTrue((g ** order).is_identity)

    def test_gl2_order(self):
        """Known group orders."""
        expected = {2: 6, 3: 48, 4: 96, 5: 480, 6: 288, 8: 1536, 9: 3888, 12: 4608}
        for modulus, order in expected.items():
            with self.subTest(modulus=modulus):
                self.assertEqual(gl2_order(modulus), order)

    def test_charpoly(self):
        """Characteristic polynomial is (trace, det)."""
        g = GL2Element(7, 2, 3, 1, 4)
        poly = charpoly(g)
        self.assertEqual((poly.trace, poly.det), (6, 5))

    def test_reduce(self):
        """Reduction to a divisor, and rejection of non-divisors."""
        g = GL2Element(12, 5, 7, 2, 11)
        self.assertEqual(reduce(g, 4), GL2Element(4, 1, 3, 2, 3))
        with self.assertRaises(ModulusError):
            reduce(g, 5)

    def test_crt_round_trip(self):
        """crt_combine inverts crt_decompose."""
        expected_moduli = {6: [2, 3], 10: [2, 5], 12: [4, 3]}
        for modulus, moduli in expected_moduli.items():
            for _ in range(10):
                g = random_element(self.rng, modulus)
                parts = crt_decompose(g)
                with self.subTest(element=str(g)):
                    self.assertEqual([p.modulus for p in parts], moduli)
                    self.assertEqual(crt_combine(parts), g)

    def test_crt_requires_coprime_moduli(self):
        with self.assertRaises(ModulusError):
            crt_combine([GL2Element.identity(2), GL2Element.identity(4)])


if __name__ == '__main__':
    unittest.main()
