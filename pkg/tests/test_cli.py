"""
Tests for the command-line entry point: exit codes and JSON reports.
"""

import contextlib
import io
import json
import tempfile
import unittest
from unittest import mock
from pathlib import Path

import main
from src.utils.reports import REPORT_SCHEMA, Report, load_report, resolve_cache_dir


def run_cli(*argv):
    """Run main() quietly; returns (exit code, stdout)."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main.main(list(argv))
    return code, out.getvalue() + err.getvalue()


class TestCommands(unittest.TestCase):
    """Exit codes and report content."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def common(self, name):
        return ["--cache-dir", str(self.dir / "cache"), "--out", str(self.dir / name)]

    def test_named_group(self):
        code, output = run_cli("groups", "named", "--id", "Borel(5)", *self.common("g.json"))
        self.assertEqual(code, 0)
        self.assertIn("Borel(5)", output)
        report = load_report(self.dir / "g.json")
        self.assertEqual(report['schema'], REPORT_SCHEMA)
        self.assertEqual(report['command'], 'groups named')
        self.assertEqual(report['witnesses']['group']['order'], 80)
        self.assertEqual(report['witnesses']['group']['class'], 'BorelContained')

    def test_abelianize(self):
        code, _ = run_cli("groups", "abelianize", "--modulus", "3", "--gens", "1,1;0,1|2,0;0,1",
                          *self.common("a.json"))
        self.assertEqual(code, 0)
        report = load_report(self.dir / "a.json")
        self.assertEqual(report['witnesses'], {'order': 6, 'abelianization': [2]})

    def test_family_j(self):
        code, _ = run_cli("family", "j", "--id", "mod4g-jline", "--t", "1", *self.common("j.json"))
        self.assertEqual(code, 0)
        self.assertEqual(load_report(self.dir / "j.json")['witnesses'], {'j': '-36'})

    def test_verify_claim(self):
        code, output = run_cli("verify", "--claim", "exceptional", *self.common("v.json"))
        self.assertEqual(code, 0)
        self.assertIn("exceptional", output)
        report = load_report(self.dir / "v.json")
        self.assertEqual([v['verdict'] for v in report['verdicts']], ['pass'])
        self.assertIn('timing', report)
        self.assertIn('cache_hits', report)

    def test_separating_prime_exits_1(self):
        """y^2 = x^3 - x: the prime 3 splits at level 2 but not at level 4."""
        code, output = run_cli("coincide", "--curve=-1,0", "-m", "2", "-n", "4",
                               "--bound", "100", *self.common("c.json"))
        self.assertEqual(code, 1)
        self.assertIn("witness prime 3", output)
        report = load_report(self.dir / "c.json")
        self.assertEqual(report['verdicts'][0]['verdict'], 'unequal-with-witness')
        self.assertEqual(report['witnesses'], {'prime': 3})

    def test_no_timing_is_deterministic(self):
        args = ["verify", "--claim", "cyclotomic-bound", "--no-timing"]
        run_cli(*args, *self.common("first.json"))
        run_cli(*args, *self.common("second.json"))
        first = (self.dir / "first.json").read_bytes()
        self.assertEqual(first, (self.dir / "second.json").read_bytes())
        payload = json.loads(first)
        self.assertNotIn('timing', payload)
        self.assertNotIn('cache_hits', payload)

    def test_input_errors_exit_2(self):
        cases = [
            ("groups", "named"),
            ("verify",),
            ("coincide", "--curve", "0,0", "-m", "2", "-n", "4"),
            ("family", "j", "--id", "mod4g-jline", "--t", "-1"),
            ("groups", "named", "--id", "Nope(3)"),
        ]
        for argv in cases:
            with self.subTest(argv=argv):
                code, output = run_cli(*argv)
                self.assertEqual(code, 2)
                self.assertIn("Error", output)

    def test_unknown_claim_rejected_by_parser(self):
        with self.assertRaises(SystemExit):
            run_cli("verify", "--claim", "not-a-claim")


class TestReports(unittest.TestCase):

    def test_failed_flag(self):
        self.assertFalse(Report('x', verdicts=[{'verdict': 'pass'}]).failed)
        self.assertTrue(Report('x', verdicts=[{'verdict': 'pass'}, {'verdict': 'fail'}]).failed)
        self.assertTrue(Report('x', verdicts=[{'verdict': 'unequal-with-witness'}]).failed)
        self.assertFalse(Report('x', verdicts=[{'verdict': 'heuristically-equal'}]).failed)

    def test_cache_dir_resolution(self):
        self.assertEqual(resolve_cache_dir("/tmp/somewhere"), Path("/tmp/somewhere"))
        with mock.patch.dict('os.environ', {'ECL_CACHE_DIR': '/tmp/env-cache'}):
            self.assertEqual(resolve_cache_dir(None), Path('/tmp/env-cache'))


if __name__ == '__main__':
    unittest.main()
