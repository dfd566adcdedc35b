"""
nnlab command line: expand, zn, synthesize, analyze, verify

every artifact written gets a sidecar <artifact>.manifest.json (command, config digest, versions, seed, sha256);
exit codes are 0 on success, 1 when a verification fails and 2 on usage errors
"""

import re
import sys
import csv
import json
import hashlib
import logging
import argparse
import platform
from fractions import Fraction
from itertools import islice

import mpmath
import networkx
import numpy as np

import nnlab
from nnlab import cesaro, expansions, oscillation, simplex, synthesizer, wordfactory
from nnlab.config import load_config
from nnlab.errors import NNLabError, UsageError
from nnlab.words import as_block, format_word, freq_vector, load_word, parse_word, word_to_json

log = logging.getLogger(__name__)

SUITES = ('gap', 'property-p', 'levy', 'zn', 'padding', 'basic-factor', 'oracle', 'lift')


"""#####################################################################################################################
                                                PARSING HELPERS
#####################################################################################################################"""


def parse_number(text):
    """
    exact rational unless suffixed with f ("1/50", "0.02", "0.02f")
    """
    text = str(text).strip()
    try:
        if text.endswith('f'):
            return float(text[:-1])
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError("not a number: %r" % text)


def parse_levels(text):
    """
    "2" is level 2 alone, "0..3" is levels 0 through 3
    """
    match = re.fullmatch(r'(\d+)(?:\.\.(\d+))?', str(text).strip())
    if not match:
        raise UsageError("levels must look like 2 or 0..3, got %r" % text)
    low = int(match.group(1))
    high = int(match.group(2)) if match.group(2) else low
    if high < low:
        raise UsageError("empty level range %r" % text)
    return list(range(low, high + 1))


def parse_block(text):
    """
    "112" reads one digit per character, "1,12" reads comma separated digits
    """
    text = text.strip()
    if ',' in text:
        return as_block(parse_word(text))
    if not text.isdigit():
        raise UsageError("bad block %r" % text)
    return as_block(int(c) for c in text)


def _load_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise UsageError("%s: bad json at line %d, column %d: %s" % (path, exc.lineno, exc.colno, exc.msg))


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(path, args, config, argv):
    """
    sidecar manifest for one artifact; deterministic for identical inputs
    """
    manifest = {
        "artifact": path,
        "sha256": _sha256(path),
        "command": list(argv),
        "config_digest": config.digest(),
        "config": config.as_dict(),
        "seed": config.seed,
        "versions": {"nnlab": nnlab.__version__, "python": platform.python_version(), "numpy": np.__version__,
                     "mpmath": mpmath.__version__, "networkx": networkx.__version__},
    }
    with open(path + '.manifest.json', 'w') as f:
        json.dump(manifest, f, indent=1, sort_keys=True)


def _emit(args, config, argv, path, text):
    if path is None:
        sys.stdout.write(text if text.endswith('\n') else text + '\n')
        return
    with open(path, 'w') as f:
        f.write(text)
    write_manifest(path, args, config, argv)
    log.info("wrote %s", path)


def _emit_csv(args, config, argv, path, header, rows):
    if path is None:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
        return
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    write_manifest(path, args, config, argv)


def _rational(value):
    value = Fraction(value)
    return "%d/%d" % (value.numerator, value.denominator)


"""#####################################################################################################################
                                                SUBCOMMANDS
#####################################################################################################################"""


def run_expand(args, config, argv):
    sources = [s for s in (args.value, args.rational, args.decimal) if s is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one of --value, --rational, --decimal")
    x = expansions.parse_real(sources[0])
    kind = expansions.ExpansionKind.parse(args.system)
    digits = expansions.expand(kind, x, args.digits, precision_bits=config.precision_bits,
                               precision_retries=config.precision_retries, orbit_limit=config.orbit_limit)
    text = word_to_json(digits) if args.out else format_word(digits)
    _emit(args, config, argv, args.out, text)
    return 0


def run_zn(args, config, argv):
    q = simplex.SimplexVector.from_json(_load_json(args.target))
    spec = wordfactory.ZnSpec.for_vector(q, args.n)
    gamma = wordfactory.construct_zn_word(spec)
    distance = simplex.l1_distance(freq_vector(gamma, q.k, len(gamma)), q)
    certificate = {"word": list(gamma), "length": len(gamma), "min_length": spec.min_length,
                   "distance": _rational(distance), "tolerance": _rational(spec.tolerance),
                   "in_zn": wordfactory.is_in_zn(gamma, spec)}
    _emit(args, config, argv, args.out, json.dumps(certificate))
    return 0 if certificate["in_zn"] else 1


def run_synthesize(args, config, argv):
    schedule = synthesizer.load_schedule(args.schedule, max_length=config.max_length)
    result = synthesizer.synthesize(schedule, stage_window=config.stage_window)
    _emit(args, config, argv, args.out, word_to_json(result.stream))
    if args.report:
        _emit(args, config, argv, args.report, json.dumps(result.report_json(), indent=1))
    return 0 if not result.skipped else 1


def run_analyze(args, config, argv):
    stream = load_word(args.digits)
    levels = parse_levels(args.r)
    blocks = [parse_block(b) for b in args.blocks]
    tolerance = parse_number(args.tolerance) if args.tolerance else config.shortfall_tolerance
    report = oscillation.oscillation_report(stream, blocks, max(levels), tolerance=tolerance, n0=args.n0,
                                            exact=config.exact, exact_cap=config.exact_cap,
                                            tail_fraction=config.tail_fraction, float_slack=config.float_slack)
    report.rows = [row for row in report.rows if row.r in levels]
    if args.report:
        report.write_csv(args.report)
        write_manifest(args.report, args, config, argv)
    else:
        for row in report.rows:
            e = row.estimate
            print("%s\tr=%d\t(%d, %d]\t[%.6f, %.6f]\tper=%d\tshortfall=%.6f"
                  % (format_word(e.block), e.r, e.n0, e.n1, e.lo, e.hi, row.period, row.shortfall))
    return 0


"""#####################################################################################################################
                                                VERIFY SUITES
#####################################################################################################################"""


def _rng_words(seed, count, length, alphabet):
    children = np.random.SeedSequence(seed).spawn(count)
    return [tuple(int(d) for d in np.random.default_rng(child).integers(1, alphabet + 1, size=length))
            for child in children]


def suite_gap(args, config, argv):
    violations = 0
    largest = {}
    for word in _rng_words(config.seed, args.streams, args.n, args.alphabet):
        found, table = cesaro.gap_survey(word, args.r, exact=config.exact, exact_cap=config.exact_cap,
                                         float_slack=config.float_slack)
        violations += len(found)
        for key, value in table.items():
            largest[key] = max(largest.get(key, 0), value)
    rows = [(low, high, r, repr(float(value)), _rational(Fraction(1, low + 1)))
            for (low, high, r), value in sorted(largest.items())]
    _emit_csv(args, config, argv, args.report, ['n_from', 'n_to', 'r', 'max_gap', 'bound_at_n_from'], rows)
    log.info("gap suite: %d violations", violations)
    return 0 if violations == 0 else 1


def suite_property_p(args, config, argv):
    if not (args.stream and args.schedule):
        raise UsageError("property-p needs --stream and --schedule")
    stream = load_word(args.stream)
    schedule = synthesizer.load_schedule(args.schedule, max_length=config.max_length)
    report = synthesizer.verify_property_p(stream, schedule.stages, args.r, exact=config.exact,
                                           exact_cap=config.exact_cap, float_slack=config.float_slack,
                                           stage_window=config.stage_window)
    _emit(args, config, argv, args.report, json.dumps(report.to_json(), indent=1))
    return 0 if report.ok else 1


def suite_levy(args, config, argv):
    survey = expansions.digit_frequency_survey(args.seeds, args.count, seed=config.seed,
                                               precision_bits=config.precision_bits,
                                               precision_retries=config.precision_retries)
    tolerance = float(parse_number(args.tolerance)) if args.tolerance else 0.01
    rows = []
    ok = True
    for digit, mean, std, expected in survey.rows():
        within = abs(mean - expected) <= tolerance
        ok = ok and within
        rows.append((digit, repr(mean), repr(std), repr(expected), within))
    _emit_csv(args, config, argv, args.report, ['digit', 'mean', 'std', 'gauss', 'within'], rows)
    return 0 if ok else 1


def suite_zn(args, config, argv):
    rows = []
    ok = True
    for index, q in enumerate(islice(simplex.enumerate_dense(args.k, args.N_max, args.denom_max), args.limit)):
        spec = wordfactory.ZnSpec.for_vector(q, args.n)
        gamma = wordfactory.construct_zn_word(spec)
        inside = wordfactory.is_in_zn(gamma, spec)
        ok = ok and inside
        rows.append((index, str(q), len(gamma), inside))
    _emit_csv(args, config, argv, args.report, ['index', 'q', 'length', 'in_zn'], rows)
    return 0 if ok else 1


def suite_padding(args, config, argv):
    rng = np.random.default_rng(config.seed)
    targets = list(simplex.enumerate_dense(2, 2, 4))
    rows = []
    total = 0
    for trial in range(args.trials):
        t = int(rng.integers(0, 51))
        omega = tuple(int(d) for d in rng.integers(1, 6, size=t))
        q = targets[int(rng.integers(0, len(targets)))]
        n = int(rng.choice([6, 12, 24]))
        L, violations, worst = wordfactory.padding_violations(omega, q, n, args.extra)
        total += len(violations)
        rows.append((trial, t, str(q), n, L, len(violations), _rational(worst)))
    _emit_csv(args, config, argv, args.report, ['trial', 't', 'q', 'n', 'L', 'violations', 'worst'], rows)
    return 0 if total == 0 else 1


def suite_basic_factor(args, config, argv):
    blocks = [parse_block(b) for b in (args.blocks or ['1', '12', '112', '1213'])]
    tolerance = float(parse_number(args.tolerance)) if args.tolerance else 5e-3
    rows = []
    ok = True
    for block in blocks:
        report = oscillation.basic_factor_limit_check(block, args.r, args.n, ratio=config.checkpoint_ratio,
                                                      exact=config.exact, exact_cap=config.exact_cap)
        fine = report.bound_ok and all(value <= tolerance for value in report.final)
        ok = ok and fine
        rows.append((format_word(block), report.period, len(report.violations))
                    + tuple(repr(v) for v in report.final) + (fine,))
    header = ['block', 'per', 'bound_violations'] + ['deviation_r%d' % r for r in range(args.r + 1)] + ['ok']
    _emit_csv(args, config, argv, args.report, header, rows)
    return 0 if ok else 1


def suite_oracle(args, config, argv):
    mismatches = 0
    for word in _rng_words(config.seed, args.words, args.n, 3):
        for k in (1, 2):
            mismatches += len(cesaro.oracle_mismatches(word, k, args.r))
    _emit(args, config, argv, args.report, json.dumps({"words": args.words, "n": args.n, "r": args.r,
                                                        "mismatches": mismatches}))
    return 0 if mismatches == 0 else 1


def suite_lift(args, config, argv):
    if not (args.stream and args.target):
        raise UsageError("lift needs --stream and --target")
    stream = load_word(args.stream)
    q = simplex.SimplexVector.from_json(_load_json(args.target))
    stage = synthesizer.Stage(q, h=args.h, m=args.m)
    report = synthesizer.cesaro_lift_check(stream, stage, args.j_prime, args.r, exact=config.exact,
                                           exact_cap=config.exact_cap, float_slack=config.float_slack)
    _emit(args, config, argv, args.report, json.dumps(report.to_json(), indent=1))
    return 0 if report.ok else 1


_SUITES = {'gap': suite_gap, 'property-p': suite_property_p, 'levy': suite_levy, 'zn': suite_zn,
           'padding': suite_padding, 'basic-factor': suite_basic_factor, 'oracle': suite_oracle, 'lift': suite_lift}


def run_verify(args, config, argv):
    return _SUITES[args.suite](args, config, argv)


"""#####################################################################################################################
                                                DISPATCH
#####################################################################################################################"""


def build_parser():
    parser = argparse.ArgumentParser(prog='nnlab', description="non-normal expansions: build, analyze, verify")
    parser.add_argument('--config', help="ini file (default: shipped nnlab_config.ini or $NNLAB_CONFIG)")
    parser.add_argument('--log-level', help="DEBUG, INFO, WARNING, ...")
    parser.add_argument('--mode', choices=['exact', 'float'])
    parser.add_argument('--exact-cap', type=int)
    parser.add_argument('--seed', type=int)
    commands = parser.add_subparsers(dest='command', required=True)

    expand = commands.add_parser('expand', help="digits of a real number")
    expand.add_argument('--system', choices=['cf', 'lueroth'], default='cf')
    expand.add_argument('--value')
    expand.add_argument('--rational')
    expand.add_argument('--decimal')
    expand.add_argument('--digits', type=int, default=20)
    expand.add_argument('--out')
    expand.set_defaults(run=run_expand)

    zn = commands.add_parser('zn', help="a word in Z_n(q, N, k) with its exact certificate")
    zn.add_argument('--target', required=True)
    zn.add_argument('--n', type=int, required=True)
    zn.add_argument('--out')
    zn.set_defaults(run=run_zn)

    synthesize = commands.add_parser('synthesize', help="realize a schedule of stages")
    synthesize.add_argument('--schedule', required=True)
    synthesize.add_argument('--out')
    synthesize.add_argument('--report')
    synthesize.set_defaults(run=run_synthesize)

    analyze = commands.add_parser('analyze', help="accumulation intervals of block frequencies")
    analyze.add_argument('--digits', required=True)
    analyze.add_argument('--blocks', nargs='+', required=True)
    analyze.add_argument('--r', default='0')
    analyze.add_argument('--n0', type=int)
    analyze.add_argument('--tolerance')
    analyze.add_argument('--report')
    analyze.set_defaults(run=run_analyze)

    verify = commands.add_parser('verify', help="run a verification suite")
    verify.add_argument('--suite', choices=SUITES, required=True)
    verify.add_argument('--n', type=int, default=2000)
    verify.add_argument('--r', type=int, default=0)
    verify.add_argument('--streams', type=int, default=20)
    verify.add_argument('--alphabet', type=int, default=5)
    verify.add_argument('--words', type=int, default=100)
    verify.add_argument('--seeds', type=int, default=200)
    verify.add_argument('--count', type=int, default=5000)
    verify.add_argument('--k', type=int, default=2)
    verify.add_argument('--N-max', dest='N_max', type=int, default=3)
    verify.add_argument('--denom-max', type=int, default=6)
    verify.add_argument('--limit', type=int, default=20)
    verify.add_argument('--trials', type=int, default=50)
    verify.add_argument('--extra', type=int, default=500)
    verify.add_argument('--blocks', nargs='+')
    verify.add_argument('--stream')
    verify.add_argument('--schedule')
    verify.add_argument('--target')
    verify.add_argument('--h', type=int, default=6)
    verify.add_argument('--m', type=int, default=1)
    verify.add_argument('--j-prime', type=int, default=4)
    verify.add_argument('--tolerance')
    verify.add_argument('--report')
    verify.set_defaults(run=run_verify)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, mode=args.mode, exact_cap=args.exact_cap, seed=args.seed,
                             log_level=args.log_level)
    except NNLabError as exc:
        print(exc.qualified(), file=sys.stderr)
        return 2
    logging.basicConfig(level=getattr(logging, config.log_level.upper(), logging.WARNING), stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        return args.run(args, config, argv)
    except NNLabError as exc:
        print(exc.qualified(), file=sys.stderr)
        return 2 if isinstance(exc, ValueError) else 1
    except OSError as exc:
        print("nnlab: %s" % exc, file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
