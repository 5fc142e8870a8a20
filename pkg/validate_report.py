#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Report Validation Module for the stammering continued fraction toolkit.

This module checks the JSON report documents written by `cli.py analyze`:
required keys, the rational encodings, and that the verdict can be re-derived
from the exponents and growth estimates embedded in the same document.

Checks performed:
- Required top-level keys and the schema version
- Witness records: integer r, s and w as a numerator/denominator pair above 1
- Growth block: M_hat >= m_hat and a well-formed window
- Verdict: known rule, margin sign, margin re-derived to 1e-9, agreement with
  the embedded condition report
"""

from __future__ import annotations

import json
import math
import pathlib
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

SCHEMA_VERSION = 1

# Expected keys for report documents
REQUIRED_REPORT_KEYS = [
    "schema_version",
    "family",
    "params",
    "prefix_len",
    "growth",
    "witnesses",
    "verdict",
]

REQUIRED_GROWTH_KEYS = ["M_hat", "m_hat", "window"]
REQUIRED_VERDICT_KEYS = ["rule", "w", "w_prime", "margin", "caveat"]
REQUIRED_WITNESS_KEYS = ["r", "s", "w_num", "w_den"]

KNOWN_RULES = ["TheoremA_w2", "TheoremA_bounded", "Theorem31", "TheoremB", "Inconclusive"]
OFFSET_ZERO_RULES = ["TheoremA_w2", "TheoremA_bounded"]

MARGIN_TOLERANCE = 1e-9


def load_report(file_path: pathlib.Path) -> Tuple[Optional[Any], Optional[str]]:
    """
    Read one report file.

    Returns:
        Tuple of (document, None) on success, or (None, reason) naming why
        the file could not be used as a report
    """
    try:
        text = file_path.read_text(encoding="utf-8")
    except FileNotFoundError:
        return None, "no such report file"
    except (OSError, UnicodeDecodeError) as e:
        return None, f"cannot read report: {e}"
    if not text.strip():
        return None, "report file is empty"
    try:
        return json.loads(text), None
    except json.JSONDecodeError as e:
        return None, f"not valid JSON (line {e.lineno}, column {e.colno})"


def _rational(value: Any) -> Optional[Fraction]:
    if value is None:
        return None
    if not isinstance(value, dict) or not isinstance(value.get("num"), int) or not isinstance(value.get("den"), int):
        raise ValueError(f"expected a {{num, den}} pair, got {value!r}")
    if value["den"] <= 0:
        raise ValueError(f"denominator must be positive, got {value['den']}")
    return Fraction(value["num"], value["den"])


def expected_margin(rule: str, w: Fraction, w_prime: Fraction, M_hat: float, m_hat: float, assumed_convergent: bool) -> float:
    """
    Re-derive a verdict margin from the numbers in a report.

    Args:
        rule: Verdict rule, not Inconclusive
        w: Exponent
        w_prime: Offset ratio bound
        M_hat: Growth estimate of limsup q_l^(1/l)
        m_hat: Growth estimate of liminf q_l^(1/l)
        assumed_convergent: True when log M / log m was taken as 1

    Returns:
        float: Left side minus right side of the rule's inequality
    """
    if rule in OFFSET_ZERO_RULES:
        return float(w - 1)
    rho = 1.0 if assumed_convergent else math.log(M_hat) / math.log(m_hat)
    base = float(w_prime) * (2 * rho - 1)
    return float(w) - base - (1 if rule == "Theorem31" else rho)


def validate_witnesses(witnesses: Any) -> List[str]:
    """Check the witness records of a report."""
    if not isinstance(witnesses, list):
        return ["witnesses is not a list"]
    problems = []
    for index, record in enumerate(witnesses):
        missing = [key for key in REQUIRED_WITNESS_KEYS if key not in record]
        if missing:
            problems.append(f"witness {index} missing keys: {', '.join(missing)}")
            continue
        if not all(isinstance(record[key], int) for key in REQUIRED_WITNESS_KEYS):
            problems.append(f"witness {index} has non-integer fields")
            continue
        if record["s"] < 1 or record["r"] < 0 or record["w_den"] < 1:
            problems.append(f"witness {index} has out-of-range r, s or w_den")
        elif Fraction(record["w_num"], record["w_den"]) <= 1:
            problems.append(f"witness {index} has exponent not above 1")
    return problems


def validate_verdict(document: Dict[str, Any]) -> List[str]:
    """Check the verdict against the growth block and the condition report."""
    verdict = document["verdict"]
    growth = document["growth"]
    missing = [key for key in REQUIRED_VERDICT_KEYS if key not in verdict]
    if missing:
        return [f"verdict missing keys: {', '.join(missing)}"]
    rule = verdict["rule"]
    if rule not in KNOWN_RULES:
        return [f"unknown verdict rule {rule!r}"]

    problems = []
    try:
        w = _rational(verdict["w"])
        w_prime = _rational(verdict["w_prime"])
    except ValueError as e:
        return [f"verdict: {e}"]
    margin = verdict["margin"]

    if verdict.get("periodic") is not None and rule != "Inconclusive":
        problems.append(f"periodic prefix but verdict {rule}")
    if rule == "Inconclusive":
        if margin is not None:
            problems.append("Inconclusive verdict carries a margin")
        return problems

    if w is None or w_prime is None or not isinstance(margin, (int, float)):
        return [f"{rule} verdict needs w, w_prime and a numeric margin"]
    if margin <= 0:
        problems.append(f"{rule} verdict with non-positive margin {margin}")
    if rule == "TheoremA_w2" and w < 2:
        problems.append(f"TheoremA_w2 with w={w} below 2")
    if rule in OFFSET_ZERO_RULES and w_prime != 0:
        problems.append(f"{rule} with w_prime={w_prime}, expected 0")

    expected = expected_margin(
        rule, w, w_prime, growth["M_hat"], growth["m_hat"], bool(verdict.get("assumed_convergent", False))
    )
    if abs(expected - margin) > MARGIN_TOLERANCE:
        problems.append(f"margin {margin} does not match re-derived {expected:.12g}")

    report = document.get("report")
    if isinstance(report, dict):
        try:
            if rule in OFFSET_ZERO_RULES and _rational(report.get("star_w")) != w:
                problems.append(f"{rule} uses w={w} but the report certifies star_w={report.get('star_w')}")
            if rule not in OFFSET_ZERO_RULES:
                pair = report.get("starstar") or {}
                if (_rational(pair.get("w")), _rational(pair.get("w_prime"))) != (w, w_prime):
                    problems.append(f"{rule} uses (w, w')=({w}, {w_prime}) but the report certifies {pair}")
        except ValueError as e:
            problems.append(f"report: {e}")
    return problems


def validate_report(document: Any) -> List[str]:
    """
    Check one report document.

    Args:
        document: Parsed JSON report

    Returns:
        List[str]: Problems found; empty when the document is valid
    """
    if not isinstance(document, dict):
        return ["report is not a JSON object"]
    missing = [key for key in REQUIRED_REPORT_KEYS if key not in document]
    if missing:
        return [f"missing key: {key}" for key in missing]

    problems = []
    if document["schema_version"] != SCHEMA_VERSION:
        problems.append(f"schema_version {document['schema_version']!r}, expected {SCHEMA_VERSION}")

    growth = document["growth"]
    growth_missing = [key for key in REQUIRED_GROWTH_KEYS if key not in growth]
    if growth_missing:
        problems.append(f"growth missing keys: {', '.join(growth_missing)}")
        return problems
    if growth["M_hat"] < growth["m_hat"]:
        problems.append(f"M_hat={growth['M_hat']} below m_hat={growth['m_hat']}")
    window = growth["window"]
    if not (isinstance(window, list) and len(window) == 2 and 1 <= window[0] <= window[1] <= document["prefix_len"]):
        problems.append(f"growth window {window!r} outside 1..{document['prefix_len']}")

    problems.extend(validate_witnesses(document["witnesses"]))
    problems.extend(validate_verdict(document))
    return problems


def main(argv: Optional[List[str]] = None) -> int:
    """
    Validate the report files named on the command line.

    Returns:
        int: 0 when every report is valid, 2 otherwise
    """
    paths = [pathlib.Path(p) for p in (sys.argv[1:] if argv is None else argv)]
    if not paths:
        print("[ERR] usage: validate_report.py REPORT.json [...]")
        return 2

    failures = 0
    for path in paths:
        document, reason = load_report(path)
        if reason is not None:
            print(f"[ERR] {path.name}: {reason}")
            failures += 1
            continue
        problems = validate_report(document)
        if problems:
            failures += 1
            for problem in problems:
                print(f"[WARN] {path.name}: {problem}")
        else:
            verdict = document["verdict"]
            print(f"[OK] {path.name}: family={document['family']} rule={verdict['rule']} margin={verdict['margin']}")

    print("[DONE] Report validation complete")
    return 0 if failures == 0 else 2


if __name__ == "__main__":
    sys.exit(main())
