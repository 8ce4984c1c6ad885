"""
Tests for group files and the bundled data.
"""

import tempfile
import unittest
from pathlib import Path

from src.core.errors import GroupFileError
from src.core.groups import full_group, generate_subgroup
from src.core.modring import GL2Element
from src.utils.group_data import (GroupFile, load_group_file, load_sample_groups,
                                  load_sample_mod7_images, parse_group_file, save_group_file)


class TestParsing(unittest.TestCase):
    """Group-file text to GroupFile."""

    def test_mixed_generator_forms(self):
        text = ('{"modulus": 8, "note": "x", "groups": [\n'
                ' {"label": "U", "level": 4, "generators": [[[1, 1], [0, 1]], "3,0;0,1"]}\n'
                ']}')
        group_file = parse_group_file(text)
        self.assertEqual(group_file.modulus, 8)
        self.assertEqual(group_file.header, {'note': 'x'})
        entry = group_file.groups[0]
        self.assertEqual(entry.level, 4)
        self.assertEqual(entry.generators, [GL2Element(4, 1, 1, 0, 1), GL2Element(4, 3, 0, 0, 1)])

    def test_level_defaults_to_modulus(self):
        group_file = parse_group_file('{"modulus": 3, "groups": [{"label": "g", '
                                      '"generators": ["1,1;0,1"]}]}')
        self.assertEqual(group_file.groups[0].level, 3)

    def test_errors_carry_line_numbers(self):
        cases = [
            ('{\n "modulus": 8,\n "groups": [,]\n}', 3),
            ('{\n "modulus": 1,\n "groups": []\n}', 2),
            ('{\n "modulus": 8,\n "groups": 5\n}', 3),
            ('{\n "modulus": 8,\n "groups": [\n  {"label": "A", "generators": ["1,1;0"]}\n ]\n}', 4),
            ('{\n "modulus": 8,\n "groups": [\n  {"label": "B", "level": 3, "generators": []}\n ]\n}', 4),
            ('{\n "modulus": 8,\n "groups": [\n  {"label": "C", "generators": [[[2, 0], [0, 2]]]}\n ]\n}', 4),
        ]
        for text, line in cases:
            with self.subTest(text=text):
                with self.assertRaises(GroupFileError) as ctx:
                    parse_group_file(text)
                self.assertEqual(ctx.exception.line, line)
                self.assertIn(f"line {line}", str(ctx.exception))

    def test_top_level_must_be_object(self):
        with self.assertRaises(GroupFileError):
            parse_group_file("[1, 2]")


class TestFiles(unittest.TestCase):
    """Saving, loading and lifting."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / "nested" / "groups.json"

    def tearDown(self):
        self.tmp.cleanup()

    def test_save_and_load(self):
        borel = generate_subgroup(5, [GL2Element(5, 1, 1, 0, 1), GL2Element(5, 2, 0, 0, 1),
                                      GL2Element(5, 1, 0, 0, 2)], label="Borel(5)")
        original = GroupFile.from_subgroups(5, [borel, full_group(5)], header={'source': 'test'})
        save_group_file(self.path, original)
        self.assertEqual(list(self.path.parent.glob("*.tmp")), [])

        loaded = load_group_file(self.path)
        self.assertEqual(loaded.header, {'source': 'test'})
        self.assertEqual([e.label for e in loaded.groups], ["Borel(5)", "GL(2,Z/5)"])
        self.assertEqual([g.order for g in loaded.subgroups()], [80, 480])
        self.assertEqual(list(loaded.to_dataframe().columns), ['label', 'level', 'generators'])

    def test_missing_file(self):
        with self.assertRaises(GroupFileError):
            load_group_file(self.path)

    def test_lift_to_modulus(self):
        group_file = parse_group_file('{"modulus": 4, "groups": [{"label": "T", "level": 2, '
                                      '"generators": []}]}')
        lifted = group_file.subgroups()[0]
        self.assertEqual((lifted.modulus, lifted.order, lifted.label), (4, 16, "T"))


class TestBundledData(unittest.TestCase):

    def test_sample_groups(self):
        sample = load_sample_groups()
        self.assertEqual(sample.modulus, 32)
        self.assertEqual([e.label for e in sample.groups],
                         ['Mod4G', 'Mod4H', 'Curve32a3Level(5)', 'GL(2,Z/2)'])

    def test_mod7_images(self):
        images = load_sample_mod7_images()
        self.assertTrue(images.header.get('partial'))
        self.assertEqual([g.order for g in images.subgroups()], [2016, 252, 72, 96])


if __name__ == '__main__':
    unittest.main()
