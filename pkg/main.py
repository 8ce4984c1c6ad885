#!/usr/bin/env python3
"""
Main entry point for the Division Field Toolkit.
"""

import argparse
import logging
import subprocess
import sys
import time
from pathlib import Path

import pandas as pd
from sympy import isprime

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent / "src"))

from src.core.curve import RationalCurve, frobenius_data, rational_torsion
from src.core.enumeration import SubgroupFilter, cache_stats, enumerate_subgroups
from src.core.families import FamilyId, cm_exclusion_scan, instantiate, j_value
from src.core.groups import abelian_invariants, generate_subgroup
from src.core.menagerie import NamedGroupId, classify_subgroup, is_admissible, named_group
from src.core.modring import GL2Element, element_order
from src.core.probe import (DEFAULT_BOUND, WITNESS_THRESHOLD, coincide_heuristic,
                            cyclotomic_bound, cyclotomic_containment, probe_image)
from src.core.verification import CLAIMS, rzb_scan, run_claim, run_suite, scan_pairs
from src.utils.group_data import load_group_file
from src.utils.reports import Report, resolve_cache_dir, verdict_table, write_report

def _group_summary(group) -> dict:
    return {
        'label': group.label,
        'modulus': group.modulus,
        'order': group.order,
        'abelianization': abelian_invariants(group).as_list(),
        'admissible': is_admissible(group),
        'generators': [str(g) for g in group.small_generators],
    }


def _parse_levels(text: str):
    try:
        return [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise ValueError(f"--levels must be comma-separated integers, got '{text}'") from None


def _parse_congruence(text):
    if text is None:
        return None
    try:
        mod, residue = (int(v) for v in text.split(':'))
    except ValueError:
        raise ValueError(f"--congruence must look like m:r, got '{text}'") from None
    return mod, residue


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args, cache_dir) -> Report:
    if not args.all and not args.claim:
        raise ValueError("verify needs --all or --claim ID")
    parameters = {}
    if args.p is not None:
        parameters['p'] = args.p
    if args.n is not None:
        parameters['n'] = args.n
    if args.levels is not None:
        parameters['levels'] = _parse_levels(args.levels)
    if args.max is not None:
        parameters['max_level'] = args.max

    if args.all:
        reports = run_suite(jobs=args.jobs, cache_dir=cache_dir, seed=args.seed, bound=args.bound)
    else:
        reports = run_claim(args.claim, parameters or None, jobs=args.jobs, cache_dir=cache_dir,
                            seed=args.seed, bound=args.bound)

    print("🧮 Claim verification")
    print("=" * 50)
    for r in reports:
        mark = "✅" if r.passed else "❌"
        print(f"{mark} {r.claim} {r.parameters or ''} ({r.elapsed:.2f}s)")
        if not r.passed:
            print(f"     counterexample: {r.counterexample}")

    return Report(
        command='verify',
        parameters={'claims': 'all' if args.all else [args.claim], **parameters},
        verdicts=[r.to_dict(include_timing=False) for r in reports],
        witnesses={f"{r.claim} {r.parameters}": r.counterexample for r in reports if not r.passed},
        timing={f"{r.claim} {r.parameters}": r.elapsed for r in reports},
    )


def cmd_groups(args, cache_dir) -> Report:
    if args.action == 'named':
        if not args.id:
            raise ValueError("groups named needs --id")
        group = named_group(NamedGroupId.parse(args.id))
        summary = _group_summary(group)
        if isprime(group.modulus):
            summary['class'] = classify_subgroup(group).value
        print(f"🔷 {group.label}: order {group.order} mod {group.modulus}")
        for key, value in summary.items():
            print(f"   {key}: {value}")
        return Report(command='groups named', parameters={'id': args.id},
                      witnesses={'group': summary})

    if args.modulus is None:
        raise ValueError(f"groups {args.action} needs --modulus")

    if args.action == 'enumerate':
        subgroup_filter = SubgroupFilter(det_surjective=args.admissible,
                                         cc_element=args.admissible,
                                         non_abelian=args.non_abelian)
        groups = enumerate_subgroups(args.modulus, subgroup_filter, jobs=args.jobs,
                                     cache_dir=cache_dir)
        summaries = [_group_summary(g) for g in groups]
        print(f"🔷 {len(groups)} classes mod {args.modulus} ({subgroup_filter.describe()})")
        if summaries:
            print(pd.DataFrame(summaries).to_string(index=False))
        return Report(command='groups enumerate',
                      parameters={'modulus': args.modulus, 'admissible': args.admissible,
                                  'non_abelian': args.non_abelian},
                      witnesses={'groups': summaries})

    if not args.gens:
        raise ValueError("groups abelianize needs --gens")
    gens = [GL2Element.parse(text, args.modulus) for text in args.gens.split('|')]
    group = generate_subgroup(args.modulus, gens)
    invariants = abelian_invariants(group)
    print(f"🔷 <{args.gens}> mod {args.modulus}: order {group.order}, G/G' = {invariants}")
    return Report(command='groups abelianize',
                  parameters={'modulus': args.modulus, 'gens': args.gens},
                  witnesses={'order': group.order, 'abelianization': invariants.as_list()})


def cmd_image(args, cache_dir) -> Report:
    curve = RationalCurve.parse(args.curve)
    image = probe_image(curve, args.modulus, args.bound, seed=args.seed, jobs=args.jobs,
                        cache_dir=cache_dir)
    print(f"🔍 Probable mod-{args.modulus} image of {curve}")
    print(f"   primes used: {len(image.primes_used)}, skipped: {image.primes_skipped}")
    if image.insufficient_sampling:
        print("   ⚠️  insufficient sampling: several candidates of minimal order survive")
    table = image.to_dataframe()
    if not table.empty:
        print(table.to_string(index=False))
    minimal = [_group_summary(g) for g in image.minimal_survivors]
    return Report(command='image probe',
                  parameters={'curve': args.curve, 'modulus': args.modulus, 'bound': args.bound,
                              'seed': args.seed},
                  verdicts=[{'consistent': image.consistent,
                             'survivors': len(image.survivors),
                             'insufficient_sampling': image.insufficient_sampling}],
                  witnesses={'minimal_survivors': minimal,
                             'observed_dets': image.observed_dets()})


def cmd_coincide(args, cache_dir) -> Report:
    curve = RationalCurve.parse(args.curve)
    verdict = coincide_heuristic(curve, args.m, args.n, args.bound, args.threshold,
                                 cross_check=args.cross_check, seed=args.seed, jobs=args.jobs,
                                 cache_dir=cache_dir)
    print(f"🔍 Q(E[{args.m}]) vs Q(E[{args.n}]) for {curve}: {verdict.verdict.value}")
    if verdict.witness is not None:
        print(f"   witness prime {verdict.witness} splits only at level {verdict.witness_level}")
    for note in verdict.notes:
        print(f"   note: {note}")
    return Report(command='coincide',
                  parameters={'curve': args.curve, 'm': args.m, 'n': args.n,
                              'bound': args.bound, 'threshold': args.threshold,
                              'seed': args.seed},
                  verdicts=[verdict.to_dict()],
                  witnesses={'prime': verdict.witness})


def cmd_cyclotomic(args, cache_dir) -> Report:
    curve = RationalCurve.parse(args.curve)
    congruence = _parse_congruence(args.congruence)
    result = cyclotomic_containment(curve, args.level, args.root, args.bound, args.threshold,
                                    congruence=congruence, seed=args.seed, jobs=args.jobs)
    print(f"🔍 Q(zeta_{args.root}) in Q(E[{args.level}]) for {curve}: {result.verdict.value}")
    if result.counterexample is not None:
        print(f"   split prime {result.counterexample} is not 1 mod {args.root}")
    else:
        print(f"   {len(result.witnesses)} split primes, all 1 mod {args.root}")
    return Report(command='cyclotomic',
                  parameters={'curve': args.curve, 'level': args.level, 'root': args.root,
                              'bound': args.bound, 'congruence': args.congruence,
                              'seed': args.seed},
                  verdicts=[result.to_dict()],
                  witnesses={'prime': result.counterexample})


def cmd_family(args, cache_dir) -> Report:
    if args.action == 'cm-exclusion':
        family_id = args.id or FamilyId.MOD4G_JLINE.value
        report = cm_exclusion_scan(family_id, jobs=args.jobs)
        print(f"👪 CM exclusion on {family_id}")
        print(report.to_dataframe().to_string(index=False))
        passed = report.all_excluded and report.control_found
        return Report(command='family cm-exclusion', parameters={'id': family_id},
                      verdicts=[{'verdict': 'pass' if passed else 'fail',
                                 'all_excluded': report.all_excluded,
                                 'control_found': report.control_found}],
                      witnesses={str(e.j0): [str(r) for r in e.roots] for e in report.entries})

    if not args.id or args.t is None:
        raise ValueError(f"family {args.action} needs --id and --t")
    if args.action == 'j':
        value = j_value(args.id, args.t)
        print(f"👪 j({args.id}, t = {args.t}) = {value}")
        return Report(command='family j', parameters={'id': args.id, 't': args.t},
                      witnesses={'j': str(value)})

    curve = instantiate(args.id, args.t)
    torsion = rational_torsion(curve)
    print(f"👪 {args.id} at t = {args.t}: {curve}")
    print(f"   j = {curve.j_invariant}")
    print(f"   torsion: {torsion.structure}")
    return Report(command='family instantiate', parameters={'id': args.id, 't': args.t},
                  witnesses={'coefficients': [str(c) for c in curve.coefficients],
                             'j': str(curve.j_invariant),
                             'torsion': torsion.structure.as_list()})


def cmd_pairs(args, cache_dir) -> Report:
    mod7 = load_group_file(args.mod7) if args.mod7 else None
    report = scan_pairs(args.max, mod7, jobs=args.jobs, cache_dir=cache_dir)
    print(f"🔗 Level pairs up to {args.max}")
    print(pd.DataFrame(list(report.details['pairs'].values())).to_string(index=False))
    print(f"   not excluded: {report.details['not_excluded']}")
    if report.details['external_data_required']:
        print(f"   ⚠️  need mod-7 image data: {report.details['external_data_required']}")
    if report.details['provisional']:
        print(f"   ⚠️  excluded by a partial mod-7 list (provisional): "
              f"{report.details['provisional']}")
    return Report(command='pairs', parameters={'max': args.max, 'mod7': args.mod7},
                  verdicts=[report.to_dict(include_timing=False)],
                  witnesses={'counterexample': report.counterexample},
                  timing={'pairs': report.elapsed})


def cmd_rzb(args, cache_dir) -> Report:
    group_file = load_group_file(args.file) if args.file else None
    report = rzb_scan(group_file)
    print(f"🔗 2-adic coincidence scan (modulus {report.parameters['modulus']})")
    for entry in report.details['groups']:
        levels = ", ".join(f"2^{k} -> 2^{k + 1}" for k in entry['coincidences']) or "none"
        print(f"   {entry['label']}: orders {entry['orders']}, coincidences {levels}")
    return Report(command='rzb', parameters={'file': args.file},
                  verdicts=[report.to_dict(include_timing=False)],
                  witnesses={'with_coincidence': report.details['with_coincidence']},
                  timing={'rzb': report.elapsed})


COMMANDS = {
    'verify': cmd_verify,
    'groups': cmd_groups,
    'image': cmd_image,
    'coincide': cmd_coincide,
    'cyclotomic': cmd_cyclotomic,
    'family': cmd_family,
    'pairs': cmd_pairs,
    'rzb': cmd_rzb,
}


# ---------------------------------------------------------------------------
# Demo and tests
# ---------------------------------------------------------------------------

def run_demo():
    """Run a command-line demo."""
    print("🧮 Division Field Toolkit Demo")
    print("=" * 50)

    g = GL2Element.parse("1,1;0,1", 8)
    print(f"\n🔢 GL(2, Z/8): {g} has order {element_order(g)}, det {g.det}, trace {g.trace}")

    print("\n🔷 Exceptional groups mod 5 and 13:")
    for name in ('H5', 'H13'):
        group = named_group(NamedGroupId(name))
        print(f"   {name}: order {group.order}, G/G' = {abelian_invariants(group)}, "
              f"class {classify_subgroup(group).value}")

    curve = RationalCurve.parse("0,0,0,13,-34")
    print(f"\n📈 Curve 40a4: {curve}")
    print(f"   j = {curve.j_invariant}, torsion {rational_torsion(curve).structure}")
    for prime in (3, 7, 11, 13):
        data = frobenius_data(curve, prime)
        print(f"   l = {prime}: #E(F_l) = {data.count}, a_l = {data.trace}")

    verdict = coincide_heuristic(curve, 2, 4, bound=2000)
    print(f"\n🔍 Q(E[2]) vs Q(E[4]) up to 2000: {verdict.verdict.value} "
          f"({verdict.common} common split primes)")

    print(f"\n🔗 cyclotomic bounds: (2,1,3) -> {cyclotomic_bound(2, 1, 3)}, "
          f"(3,1,5) -> {cyclotomic_bound(3, 1, 5)}, (3,1,7) -> {cyclotomic_bound(3, 1, 7)}")

    print("\n🎉 Demo completed successfully!")
    print("Run 'python main.py verify --all' to check every claim.")


def run_tests():
    """Run the test suite."""
    print("🧪 Running tests...")
    cmd = [sys.executable, "-m", "unittest", "discover", "tests"]
    return subprocess.run(cmd).returncode


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed for point sampling")
    common.add_argument("--jobs", type=int, default=1, help="Worker threads")
    common.add_argument("--out", help="Write a JSON report to this file")
    common.add_argument("--cache-dir", help="Subgroup cache directory "
                                            "(default: $ECL_CACHE_DIR or ~/.cache)")
    common.add_argument("--verbose", action="store_true", help="Log progress at INFO level")
    common.add_argument("--no-timing", action="store_true",
                        help="Leave timing and cache counters out of the report")

    parser = argparse.ArgumentParser(description="Division Field Toolkit")
    parser.add_argument("--demo", action="store_true", help="Run command-line demo")
    parser.add_argument("--test", action="store_true", help="Run tests")
    sub = parser.add_subparsers(dest="command")

    verify = sub.add_parser("verify", parents=[common], help="Check computational claims")
    verify.add_argument("--all", action="store_true", help="Run every claim")
    verify.add_argument("--claim", choices=sorted(CLAIMS), help="Run one claim")
    verify.add_argument("--p", type=int, help="Prime parameter")
    verify.add_argument("--n", type=int, help="Exponent parameter")
    verify.add_argument("--levels", help="Comma-separated exponents (curve-32a3)")
    verify.add_argument("--max", type=int, help="Largest level (pairs)")
    verify.add_argument("--bound", type=int, help="Prime bound (curve-examples)")

    groups = sub.add_parser("groups", parents=[common], help="Named groups and enumeration")
    groups.add_argument("action", choices=["named", "enumerate", "abelianize"])
    groups.add_argument("--id", help="Named group id, e.g. 'Borel(5)'")
    groups.add_argument("--modulus", type=int)
    groups.add_argument("--admissible", action="store_true")
    groups.add_argument("--non-abelian", action="store_true")
    groups.add_argument("--gens", help="Generators 'a,b;c,d|a,b;c,d'")

    image = sub.add_parser("image", parents=[common], help="Probable mod-n image")
    image.add_argument("action", choices=["probe"])
    image.add_argument("--curve", required=True, help="'a1,a2,a3,a4,a6' or 'A,B'")
    image.add_argument("--modulus", type=int, required=True)
    image.add_argument("--bound", type=int, default=DEFAULT_BOUND)

    coincide = sub.add_parser("coincide", parents=[common], help="Compare two division fields")
    coincide.add_argument("--curve", required=True)
    coincide.add_argument("-m", type=int, required=True)
    coincide.add_argument("-n", type=int, required=True)
    coincide.add_argument("--bound", type=int, default=DEFAULT_BOUND)
    coincide.add_argument("--threshold", type=int, default=WITNESS_THRESHOLD)
    coincide.add_argument("--no-cross-check", dest="cross_check", action="store_false",
                          help="Skip the probable-image comparison of the two levels")

    cyclotomic = sub.add_parser("cyclotomic", parents=[common],
                                help="Cyclotomic containment test")
    cyclotomic.add_argument("--curve", required=True)
    cyclotomic.add_argument("--level", type=int, required=True)
    cyclotomic.add_argument("--root", type=int, required=True, help="Prime power q^k")
    cyclotomic.add_argument("--bound", type=int, default=DEFAULT_BOUND)
    cyclotomic.add_argument("--threshold", type=int, default=WITNESS_THRESHOLD)
    cyclotomic.add_argument("--congruence", help="Restrict to primes l = r mod m, as m:r")

    family = sub.add_parser("family", parents=[common], help="Parametric families")
    family.add_argument("action", choices=["instantiate", "j", "cm-exclusion"])
    family.add_argument("--id", choices=[f.value for f in FamilyId])
    family.add_argument("--t", help="Rational parameter, e.g. '3/2'")

    pairs = sub.add_parser("pairs", parents=[common], help="Scan level pairs")
    pairs.add_argument("--max", type=int, default=10)
    pairs.add_argument("--mod7", help="Group file of known mod-7 images")

    rzb = sub.add_parser("rzb", parents=[common], help="2-adic coincidence scan")
    rzb.add_argument("--file", help="Group file mod 2^K (default: bundled sample)")
    return parser


def main(argv=None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.test:
        return run_tests()
    if args.demo or args.command is None:
        # Default to demo
        run_demo()
        return 0

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cache_dir = resolve_cache_dir(args.cache_dir)
    cache_stats.clear()
    started = time.perf_counter()
    try:
        report = COMMANDS[args.command](args, cache_dir)
    except ValueError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 2

    report.timing.setdefault('total', time.perf_counter() - started)
    report.cache_hits = dict(cache_stats)
    if args.out:
        path = write_report(report, args.out, include_timing=not args.no_timing)
        print(f"\n💾 Report written to {path}")
    elif args.verbose:
        table = verdict_table(report.verdicts)
        if not table.empty:
            print(table.to_string(index=False))
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
