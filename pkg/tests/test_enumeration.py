"""
Tests for subgroup enumeration and the lattice cache.
"""

import tempfile
import unittest
from pathlib import Path

from src.core.enumeration import (SubgroupFilter, cache_path, cache_stats, clear_memo,
                                  enumerate_subgroups, subgroup_lattice)
from src.core.errors import EnumerationCeilingError, ModulusError
from src.core.groups import are_conjugate, full_group, generate_subgroup
from src.core.modring import GL2Element


class TestSubgroupFilter(unittest.TestCase):
    """Predicates and their text form."""

    def test_describe(self):
        self.assertEqual(SubgroupFilter().describe(), "all")
        self.assertEqual(SubgroupFilter.admissible(non_abelian=True).describe(),
                         "det-surjective, cc-element, non-abelian")

    def test_digest_tracks_description(self):
        a = SubgroupFilter.admissible()
        b = SubgroupFilter(det_surjective=True, cc_element=True)
        self.assertEqual(a.digest(), b.digest())
        self.assertNotEqual(a.digest(), SubgroupFilter().digest())

    def test_accepts(self):
        s3 = full_group(2)
        c3 = generate_subgroup(2, [GL2Element(2, 0, 1, 1, 1)])
        self.assertTrue(SubgroupFilter(non_abelian=True).accepts(s3))
        self.assertFalse(SubgroupFilter(non_abelian=True).accepts(c3))
        self.assertFalse(SubgroupFilter(min_order=4).accepts(c3))
        self.assertFalse(SubgroupFilter(max_order=2).accepts(c3))


class TestEnumeration(unittest.TestCase):
    """Conjugacy-class representatives."""

    def setUp(self):
        clear_memo()

    def test_subgroups_of_s3(self):
        """GL(2, Z/2) = S3 has four classes: 1, C2, C3, S3."""
        groups = enumerate_subgroups(2)
        self.assertEqual([g.order for g in groups], [1, 2, 3, 6])
        self.assertEqual([g.label for g in groups], ["2.1.1", "2.2.1", "2.3.1", "2.6.1"])

    def test_every_mod2_group_is_admissible(self):
        """Mod 2, det is trivial and -1 = 1, so the identity has trace 0 and det -1."""
        self.assertEqual(len(enumerate_subgroups(2, SubgroupFilter.admissible())), 4)

    def test_representatives_are_pairwise_non_conjugate(self):
        groups = enumerate_subgroups(3)
        for i, h in enumerate(groups):
            for k in groups[i + 1:]:
                if h.order == k.order:
                    with self.subTest(h=h.label, k=k.label):
                        self.assertFalse(are_conjugate(h, k)[0])

    def test_sylow_subgroups_of_gl2_3(self):
        """A single class of Sylow 2-subgroups (order 16) and of Sylow 3-subgroups."""
        orders = [g.order for g in enumerate_subgroups(3)]
        self.assertEqual(orders.count(16), 1)
        self.assertEqual(orders.count(3), 1)
        self.assertEqual(orders.count(48), 1)

    def test_jobs_do_not_change_result(self):
        serial = subgroup_lattice(full_group(3))
        parallel = subgroup_lattice(full_group(3), jobs=3)
        self.assertEqual([g.codes.tolist() for g in serial],
                         [g.codes.tolist() for g in parallel])

    def test_container(self):
        borel = generate_subgroup(3, [GL2Element(3, 1, 1, 0, 1), GL2Element(3, 2, 0, 0, 1),
                                      GL2Element(3, 1, 0, 0, 2)], label="Borel(3)")
        groups = enumerate_subgroups(3, SubgroupFilter(container=borel))
        self.assertTrue(all(g.is_subgroup_of(borel) for g in groups))
        self.assertEqual(max(g.order for g in groups), 12)

    def test_container_modulus_mismatch(self):
        with self.assertRaises(ModulusError):
            enumerate_subgroups(5, SubgroupFilter(container=full_group(3)))

    def test_ceiling(self):
        with self.assertRaises(EnumerationCeilingError) as ctx:
            enumerate_subgroups(16)
        self.assertEqual(ctx.exception.ceiling, 5000)

    def test_memo(self):
        enumerate_subgroups(2)
        enumerate_subgroups(2)
        self.assertEqual(cache_stats['miss'], 1)
        self.assertEqual(cache_stats['memory'], 1)


class TestDiskCache(unittest.TestCase):
    """The advisory on-disk cache."""

    def setUp(self):
        clear_memo()
        self.tmp = tempfile.TemporaryDirectory()
        self.cache_dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()
        clear_memo()

    def test_write_then_read(self):
        subgroup_filter = SubgroupFilter.admissible()
        first = enumerate_subgroups(3, subgroup_filter, cache_dir=self.cache_dir)
        self.assertTrue(cache_path(self.cache_dir, 3, subgroup_filter).exists())
        clear_memo()
        second = enumerate_subgroups(3, subgroup_filter, cache_dir=self.cache_dir)
        self.assertEqual(cache_stats['disk'], 1)
        self.assertEqual([g.codes.tolist() for g in first], [g.codes.tolist() for g in second])
        self.assertEqual([g.label for g in first], [g.label for g in second])

    def test_corrupt_cache_is_ignored(self):
        subgroup_filter = SubgroupFilter()
        path = cache_path(self.cache_dir, 2, subgroup_filter)
        path.write_text("{ not json", encoding='utf-8')
        with self.assertLogs('src.core.enumeration', level='WARNING'):
            groups = enumerate_subgroups(2, subgroup_filter, cache_dir=self.cache_dir)
        self.assertEqual(len(groups), 4)
        self.assertEqual(cache_stats['miss'], 1)


if __name__ == '__main__':
    unittest.main()
