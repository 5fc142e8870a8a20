#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Command-line front door of the stammering continued fraction toolkit.

Subcommands:
- generate: print a family prefix in the word text format
- analyze: prefix -> convergents -> growth estimate -> repetitions -> verdict,
  emitted as a JSON report document
- verify: run one of the exact invariant suites
- matrix-report: spectral data of an odd alphabet

Word text and JSON go to standard output; diagnostics go to the error stream.
Exit codes: 0 success (an Inconclusive verdict included), 1 fatal error,
2 invalid input, 3 suite failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import pathlib
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from cf_core import (
    continuant,
    continuant_matrix,
    growth_estimate_from_word,
    iter_convergents,
    parse_theta,
    q_digits,
    write_convergents_csv,
)
from generators import (
    FAMILIES,
    ConcatFamily,
    FamilyError,
    FoldingSystem,
    baum_sweet_stream,
    build_family,
    morphic_baum_sweet_stream,
    morphic_rudin_shapiro_stream,
    nested_fold,
    paperfolding_stream,
    random_equal_blocks,
    rudin_shapiro_stream,
    verify_floor_identities,
)
from matgrowth import (
    LAMBDA_THRESHOLD,
    alphabet_spectrum,
    bound_check_lower,
    bound_check_upper,
    lemma82_sweep,
    norm_product_bound,
    theorem81_analyze,
    trace_inequality_check,
)
from stammer import (
    SELECT_DEEPEST,
    SELECTIONS,
    condition_star_star,
    criterion_verdict,
    detect_repetitions,
    periodicity_scan,
    prefix_continuants,
    reference_repetitions,
    verify_witness,
    witness_continuant_check,
)
from utils import DEFAULT_T, LOG_LEVEL, atomic_write_json, configure_precision, fraction_to_json, to_fraction
from validate_report import SCHEMA_VERSION, validate_report
from words import Alphabet, FiniteWord, mirror, parse_word_text

log = logging.getLogger("cf_stammer")

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_INVALID = 2
EXIT_SUITE_FAILED = 3

MIN_PREFIX_LEN = 100
DEFAULT_PREFIX_LEN = 4096
DEFAULT_SCAN_BOUND = 512
FIRST_LETTERS = 32

# Analysis bounds for a word read from a file with no family attached
INPUT_MIN_W = Fraction(9, 8)
INPUT_MAX_WPRIME = Fraction(0)

# Family flags forwarded as parameters when given
FAMILY_FLAGS = ("a", "b", "theta", "k", "pattern", "seed", "lam", "alphabet", "word", "symmetries", "schedule")


@dataclass
class AnalysisConfig:
    """
    Everything `analyze` needs; echoed in the report.

    Attributes:
        family: Registry name, or None for a bare input file
        params: Family parameters as strings
        input_path: Word text file to read instead of generating
        prefix_len: Letters analysed, at least 100; None means the whole input
        T: Witness scales required
        min_w: Least exponent, None for the family default
        max_wprime: Largest offset ratio, None for the family default
        max_r: Largest offset scanned, None for the detector default
        selection: Which T witnesses certify a condition, deepest or strongest
        tail_fraction: Growth-estimate window share
        max_period: Periodicity scan bound
        max_preperiod: Periodicity scan bound
        assume_convergent: Take log M / log m as exactly 1
        convergents_csv: Where to dump the convergents, if anywhere
    """

    family: Optional[str] = None
    params: Dict[str, str] = field(default_factory=dict)
    input_path: Optional[pathlib.Path] = None
    prefix_len: Optional[int] = None
    T: int = DEFAULT_T
    min_w: Optional[Fraction] = None
    max_wprime: Optional[Fraction] = None
    max_r: Optional[int] = None
    selection: str = SELECT_DEEPEST
    tail_fraction: Optional[float] = None
    max_period: int = DEFAULT_SCAN_BOUND
    max_preperiod: int = DEFAULT_SCAN_BOUND
    assume_convergent: bool = False
    convergents_csv: Optional[pathlib.Path] = None


# ==================== ANALYZE ====================


def _read_input_word(path: pathlib.Path) -> FiniteWord:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ValueError(f"cannot read {path}: {e}") from None
    words, _ = parse_word_text(text)
    if not words:
        raise ValueError(f"{path} holds no word")
    if len(words) > 1:
        log.warning("%s holds %d words; analysing the first", path, len(words))
    return words[0]


def _load_prefix(config: AnalysisConfig):
    """Return (prefix, family spec or None, merged params)."""
    spec = None
    params = dict(config.params)
    if config.family is not None:
        if config.input_path is None:
            stream, spec = build_family(config.family, params)
            prefix_len = DEFAULT_PREFIX_LEN if config.prefix_len is None else config.prefix_len
            if prefix_len < MIN_PREFIX_LEN:
                raise ValueError(f"prefix_len must be >= {MIN_PREFIX_LEN}, got {prefix_len}")
            log.info("generating %d letters of %s", prefix_len, config.family)
            return stream.take(prefix_len), spec, {**spec.defaults, **params}
        if config.family not in FAMILIES:
            raise FamilyError(f"unknown family {config.family!r}; known: {', '.join(sorted(FAMILIES))}")
        spec = FAMILIES[config.family]
        params = {**spec.defaults, **params}

    if config.input_path is None:
        raise ValueError("analyze needs a family name or --input")
    word = _read_input_word(config.input_path)
    prefix_len = len(word) if config.prefix_len is None else config.prefix_len
    if prefix_len < MIN_PREFIX_LEN:
        raise ValueError(f"prefix_len must be >= {MIN_PREFIX_LEN}, got {prefix_len}")
    if len(word) < prefix_len:
        raise ValueError(f"{config.input_path} holds {len(word)} letters, {prefix_len} requested")
    log.info("read %d letters from %s", len(word), config.input_path)
    return word[:prefix_len], spec, params


def run_analysis(config: AnalysisConfig) -> dict:
    """
    Run the full pipeline and assemble the report document.

    Args:
        config: Analysis settings

    Returns:
        dict: Report document, schema version 1

    Raises:
        ValueError: On invalid settings, unreadable input or degenerate growth
    """
    started = time.perf_counter()
    prefix, spec, params = _load_prefix(config)
    prefix_len = len(prefix)

    if spec is not None:
        default_min_w, default_max_wprime = spec.analysis_defaults(params)
    else:
        default_min_w, default_max_wprime = INPUT_MIN_W, INPUT_MAX_WPRIME
    min_w = default_min_w if config.min_w is None else config.min_w
    max_wprime = default_max_wprime if config.max_wprime is None else config.max_wprime
    assume_convergent = config.assume_convergent or (spec is not None and spec.growth_converges)

    growth = growth_estimate_from_word(prefix, config.tail_fraction)
    log.info("growth: M_hat=%.12g m_hat=%.12g", growth.M_hat, growth.m_hat)

    report = condition_star_star(prefix, prefix_len, config.T, min_w, max_wprime, config.max_r, config.selection)

    max_period = min(config.max_period, prefix_len // 3)
    max_preperiod = min(config.max_preperiod, prefix_len - 2 * max_period)
    if (max_period, max_preperiod) != (config.max_period, config.max_preperiod):
        log.warning("periodicity bounds clamped to period %d, preperiod %d", max_period, max_preperiod)
    periodic = periodicity_scan(prefix, prefix_len, max_period, max_preperiod)

    verdict = criterion_verdict(report, growth, periodic, bounded=True, assume_convergent=assume_convergent)

    unsound = [w for w in report.star_witnesses + report.starstar_witnesses if not verify_witness(prefix, w)]
    if unsound:
        raise RuntimeError(f"detector produced {len(unsound)} witnesses that fail the letterwise recheck")

    if config.convergents_csv is not None:
        with open(config.convergents_csv, "w", encoding="utf-8", newline="") as file:
            rows = write_convergents_csv(iter_convergents(prefix), file)
        log.info("wrote %d convergents to %s", rows, config.convergents_csv)

    return {
        "schema_version": SCHEMA_VERSION,
        "family": config.family if config.family is not None else "input",
        "params": params if config.input_path is None else {**params, "input": str(config.input_path)},
        "prefix_len": prefix_len,
        "first_letters": list(prefix.letters[:FIRST_LETTERS]),
        "config": {
            "T": config.T,
            "min_w": fraction_to_json(min_w),
            "max_wprime": fraction_to_json(max_wprime),
            "max_r": config.max_r,
            "selection": config.selection,
            "tail_fraction": config.tail_fraction,
            "max_period": max_period,
            "max_preperiod": max_preperiod,
            "assume_convergent": assume_convergent,
        },
        "convergents": {"L": prefix_len, "q_digits": q_digits(continuant(prefix))},
        "growth": growth.to_dict(),
        "witnesses": [w.to_dict() for w in report.witnesses],
        "report": report.to_dict(),
        "verdict": verdict.to_dict(),
        "timing": {"seconds": round(time.perf_counter() - started, 3)},
    }


# ==================== VERIFY SUITES ====================


@dataclass
class SuiteResult:
    """Counts of one invariant suite."""

    suite: str
    checked: int = 0
    failed: int = 0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "checked": self.checked,
            "failed": self.failed,
            "passed": self.passed,
            "details": self.details,
        }


def suite_floor_identities(args: argparse.Namespace) -> SuiteResult:
    result = SuiteResult("floor-identities")
    for descriptor in args.theta or ["golden", "silver", "[0;1,(2)]"]:
        report = verify_floor_identities(parse_theta(descriptor), args.n_max, args.cap)
        result.checked += report.total
        result.failed += 0 if report.passed else 1
        result.details[descriptor] = report.to_dict()
    return result


def _random_word(rng: np.random.Generator, max_len: int, max_letter: int, min_len: int = 1) -> List[int]:
    length = int(rng.integers(min_len, max_len + 1))
    return [int(a) for a in rng.integers(1, max_letter + 1, size=length)]


def suite_continuants(args: argparse.Namespace) -> SuiteResult:
    """Mirror identity, split bounds, the matrix path, and witness continuant checks."""
    result = SuiteResult("continuants")
    rng = np.random.default_rng(args.seed)
    counts = {"mirror": 0, "split": 0, "matrix": 0, "witness": 0}
    failures: List[dict] = []

    for _ in range(args.trials):
        word = _random_word(rng, args.max_len, args.max_letter, min_len=2)
        k = continuant(word)
        cut = int(rng.integers(1, len(word)))
        k_u, k_v = continuant(word[:cut]), continuant(word[cut:])
        checks = {
            "mirror": continuant(mirror(word)) == k,
            "split": k_u * k_v <= k <= 2 * k_u * k_v,
            "matrix": continuant_matrix(word)[0] == k,
        }
        for name, ok in checks.items():
            counts[name] += 1
            if not ok:
                failures.append({"check": name, "word": word})

    for name, spec in sorted(FAMILIES.items()):
        stream, _ = build_family(name)
        prefix = stream.take(args.witness_prefix)
        min_w, max_wprime = spec.analysis_defaults()
        report = condition_star_star(prefix, len(prefix), 3, min_w, max_wprime)
        qs = prefix_continuants(prefix)
        for witness in report.witnesses:
            counts["witness"] += 1
            _, _, ok = witness_continuant_check(prefix, witness, qs)
            if not (ok and verify_witness(prefix, witness)):
                failures.append({"check": "witness", "family": name, **witness.to_dict()})

    result.checked = sum(counts.values())
    result.failed = len(failures)
    result.details = {"counts": counts, "failures": failures[:10]}
    return result


def _random_equal_word(rng: np.random.Generator, alphabet: Alphabet, copies: int) -> List[int]:
    return [int(a) for a in rng.permutation(np.repeat(np.array(alphabet.letters), copies))]


def suite_matrix_growth(args: argparse.Namespace) -> SuiteResult:
    """Radius margins, per-letter continuant bounds, threshold and block growth."""
    result = SuiteResult("matrix-growth")
    failures: List[dict] = []

    sweep = lemma82_sweep(args.max_letter)
    result.checked += sweep["checked"]
    if not sweep["passed"]:
        failures.append({"check": "radius_margin", **(sweep["worst"] or {})})

    rng = np.random.default_rng(args.seed)
    bounds = {}
    for k in (3, 5):
        alphabet = Alphabet(tuple(range(1, k + 1)))
        passed = 0
        for _ in range(args.trials):
            copies = 2 * int(rng.integers(0, args.max_copies // 2 + 1)) + 1
            word = _random_equal_word(rng, alphabet, copies)
            ok = (
                bound_check_upper(word, alphabet)[2]
                and bound_check_lower(word, alphabet)[2]
                and norm_product_bound(word, alphabet)[2]
                and trace_inequality_check(word, alphabet)[2]
            )
            result.checked += 1
            if ok:
                passed += 1
            else:
                failures.append({"check": "bounds", "k": k, "word": word})
        bounds[k] = passed

    threshold = float(LAMBDA_THRESHOLD)
    result.checked += 1
    if abs(threshold - 3.25988) > 1e-4:
        failures.append({"check": "threshold", "value": threshold})

    alphabet = Alphabet((1, 2, 3))
    family = ConcatFamily(alphabet, random_equal_blocks(alphabet, args.lam, seed=args.seed), to_fraction(args.lam))
    blocks = theorem81_analyze(family, args.n_blocks)
    result.checked += len(blocks.rows)
    if blocks.threshold_pass and not blocks.all_epsilon_positive:
        failures.append({"check": "block_growth", "epsilon": [row.epsilon for row in blocks.rows]})

    result.failed = len(failures)
    result.details = {
        "radius_sweep": sweep,
        "bound_trials_passed": bounds,
        "threshold": threshold,
        "blocks": blocks.to_dict(),
        "failures": failures[:10],
    }
    return result


def suite_cross_oracles(args: argparse.Namespace) -> SuiteResult:
    """Morphic presentations against direct definitions, and the detector against the reference scan."""
    result = SuiteResult("cross-oracles")
    failures: List[dict] = []
    count = args.count

    pairs: Dict[str, Callable[[], Sequence]] = {
        "baum-sweet": lambda: (baum_sweet_stream(), morphic_baum_sweet_stream()),
        "rudin-shapiro": lambda: (rudin_shapiro_stream(), morphic_rudin_shapiro_stream()),
    }
    for name, make in pairs.items():
        direct, morphic = make()
        equal = direct.take(count) == morphic.take(count)
        result.checked += 1
        if not equal:
            failures.append({"check": "morphic", "family": name})

    folds = nested_fold([1] * 12)
    coded = paperfolding_stream(FoldingSystem()).take(len(folds))
    result.checked += 1
    if tuple(1 if e == 1 else 2 for e in folds) != coded.letters:
        failures.append({"check": "folding"})

    rng = np.random.default_rng(args.seed)
    for _ in range(args.detector_trials):
        word = _random_word(rng, args.detector_len, int(rng.integers(2, 4)), min_len=2)
        max_r = int(rng.integers(0, len(word)))
        min_w = Fraction(int(rng.integers(9, 17)), 8)
        result.checked += 1
        if detect_repetitions(word, max_r, min_w) != reference_repetitions(word, max_r, min_w):
            failures.append({"check": "detector", "word": word, "max_r": max_r})

    result.failed = len(failures)
    result.details = {"failures": failures[:10]}
    return result


SUITES: Dict[str, Callable[[argparse.Namespace], SuiteResult]] = {
    "floor-identities": suite_floor_identities,
    "continuants": suite_continuants,
    "matrix-growth": suite_matrix_growth,
    "cross-oracles": suite_cross_oracles,
}


# ==================== COMMANDS ====================


def _family_params(args: argparse.Namespace) -> Dict[str, str]:
    params: Dict[str, str] = {}
    for item in args.param or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"--param expects key=value, got {item!r}")
        params[key.strip()] = value.strip()
    for flag in FAMILY_FLAGS:
        value = getattr(args, flag, None)
        if value is not None:
            params[flag] = str(value)
    return params


def cmd_generate(args: argparse.Namespace) -> int:
    if args.count < 0:
        raise ValueError(f"--count must be non-negative, got {args.count}")
    stream, _ = build_family(args.family, _family_params(args))
    print(" ".join(str(a) for a in stream.take(args.count)))
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    if args.family is None and args.input is None:
        raise ValueError("analyze needs a family name or --input")
    config = AnalysisConfig(
        family=args.family,
        params=_family_params(args),
        input_path=pathlib.Path(args.input) if args.input else None,
        prefix_len=args.prefix_len,
        T=args.T,
        min_w=None if args.min_w is None else to_fraction(args.min_w),
        max_wprime=None if args.max_wprime is None else to_fraction(args.max_wprime),
        max_r=args.max_r,
        selection=args.selection,
        tail_fraction=args.tail_fraction,
        max_period=args.max_period,
        max_preperiod=args.max_preperiod,
        assume_convergent=args.assume_convergent_growth,
        convergents_csv=pathlib.Path(args.convergents_csv) if args.convergents_csv else None,
    )
    document = run_analysis(config)
    for problem in validate_report(document):
        log.warning("report check: %s", problem)
    if args.out:
        atomic_write_json(args.out, document)
        log.info("report written to %s", args.out)
    print(json.dumps(document, indent=2))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    result = SUITES[args.suite](args)
    print(json.dumps(result.to_dict(), indent=2))
    if result.passed:
        log.info("suite %s passed: %d checks", result.suite, result.checked)
        return EXIT_OK
    log.error("suite %s failed: %d of %d checks", result.suite, result.failed, result.checked)
    return EXIT_SUITE_FAILED


def cmd_matrix_report(args: argparse.Namespace) -> int:
    try:
        alphabet = Alphabet(tuple(int(x) for x in args.alphabet.replace(" ", ",").split(",") if x))
    except ValueError as e:
        raise ValueError(f"bad alphabet {args.alphabet!r}: {e}") from None
    document = alphabet_spectrum(alphabet).to_dict()
    if args.lam is not None:
        lam = to_fraction(args.lam)
        family = ConcatFamily(alphabet, random_equal_blocks(alphabet, lam, seed=args.seed), lam)
        document["blocks"] = theorem81_analyze(family, args.n_blocks).to_dict()
    print(json.dumps(document, indent=2))
    return EXIT_OK


# ==================== PARSER ====================


def _add_family_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--param", action="append", metavar="KEY=VALUE", help="Family parameter, repeatable")
    parser.add_argument("--a", help="Letter for the first symbol")
    parser.add_argument("--b", help="Letter for the second symbol")
    parser.add_argument("--theta", help="Davison slope: golden, silver or [0;a,...,(p,...)]")
    parser.add_argument("--k", help="Davison exponent base")
    parser.add_argument("--pattern", help="Folding instructions, e.g. +- or 1,-1")
    parser.add_argument("--seed", help="Seed of pseudorandom instructions, schedules or blocks")
    parser.add_argument("--lam", help="Block growth factor of the concat family")
    parser.add_argument("--alphabet", help="Comma-separated alphabet of the concat family")
    parser.add_argument("--word", help="Seed word of the perturbed family")
    parser.add_argument("--symmetries", help="Perturbed symmetries, X:M/X:M;...")
    parser.add_argument("--schedule", help="Indices of the symmetries applied in turn")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Stammering sequences and their continued fractions")
    parser.add_argument("--precision", type=int, default=None, help="Decimal digits for log computations")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="Print a family prefix as word text")
    gen.add_argument("family", help=f"One of: {', '.join(sorted(FAMILIES))}")
    gen.add_argument("--count", type=int, default=64, help="Letters to print")
    _add_family_flags(gen)
    gen.set_defaults(handler=cmd_generate)

    ana = sub.add_parser("analyze", help="Run the full pipeline and print a JSON report")
    ana.add_argument("family", nargs="?", help="Family name; with --input it only selects the analysis defaults")
    ana.add_argument("--input", help="Word text file to analyse")
    ana.add_argument("--prefix-len", type=int, default=None, help=f"Letters analysed, at least {MIN_PREFIX_LEN}")
    ana.add_argument("-T", type=int, default=DEFAULT_T, help="Witness scales required")
    ana.add_argument("--min-w", help="Least exponent, e.g. 5/4")
    ana.add_argument("--max-wprime", help="Largest offset ratio r/s, e.g. 1/6")
    ana.add_argument("--max-r", type=int, default=None, help="Largest offset scanned")
    ana.add_argument(
        "--selection", choices=SELECTIONS, default=SELECT_DEEPEST, help="Witnesses behind a condition: largest periods or largest exponents"
    )
    ana.add_argument("--tail-fraction", type=float, default=None, help="Share of indices in the growth window")
    ana.add_argument("--max-period", type=int, default=DEFAULT_SCAN_BOUND)
    ana.add_argument("--max-preperiod", type=int, default=DEFAULT_SCAN_BOUND)
    ana.add_argument("--assume-convergent-growth", action="store_true", help="Take log M / log m as exactly 1")
    ana.add_argument("--convergents-csv", help="Dump l,p,q,q_root rows to this file")
    ana.add_argument("--out", help="Also write the report to this file")
    _add_family_flags(ana)
    ana.set_defaults(handler=cmd_analyze)

    ver = sub.add_parser("verify", help="Run an invariant suite")
    ver.add_argument("suite", choices=sorted(SUITES))
    ver.add_argument("--theta", action="append", help="Slope for floor-identities, repeatable")
    ver.add_argument("--n-max", type=int, default=12)
    ver.add_argument("--cap", type=int, default=100_000, help="Tuples per identity")
    ver.add_argument("--trials", type=int, default=1000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--max-len", type=int, default=60)
    ver.add_argument("--max-letter", type=int, default=10)
    ver.add_argument("--max-copies", type=int, default=15, help="Largest copies per letter in random equal words")
    ver.add_argument("--witness-prefix", type=int, default=2048)
    ver.add_argument("--lam", default="4")
    ver.add_argument("--n-blocks", type=int, default=4)
    ver.add_argument("--count", type=int, default=100_000, help="Letters compared per morphic oracle")
    ver.add_argument("--detector-trials", type=int, default=1000)
    ver.add_argument("--detector-len", type=int, default=200)
    ver.set_defaults(handler=cmd_verify)

    mat = sub.add_parser("matrix-report", help="Spectral data of an odd alphabet")
    mat.add_argument("--alphabet", default="1,2,3")
    mat.add_argument("--lam", default=None, help="Also analyse a pseudorandom block family with this factor")
    mat.add_argument("--n-blocks", type=int, default=4)
    mat.add_argument("--seed", type=int, default=0)
    mat.set_defaults(handler=cmd_matrix_report)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments and dispatch; returns the exit code."""
    args = build_parser().parse_args(argv)
    try:
        if args.precision is not None:
            configure_precision(args.precision)
        return args.handler(args)
    except ValueError as e:
        log.error("%s", e)
        return EXIT_INVALID


def main() -> None:
    """Main entry point."""
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL, logging.INFO),
        format="%(asctime)s [%(levelname)s] %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    try:
        code = run()
    except Exception as e:
        log.exception("Fatal error: %s", e)
        sys.exit(EXIT_FATAL)
    sys.exit(code)


if __name__ == "__main__":
    main()
