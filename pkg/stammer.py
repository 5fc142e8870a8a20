"""
Stammering detection and verdict rules.

A repetition witness (r, s, w) says the scanned word begins with U V^w where
|U| = r and |V| = s. Exponents are exact rationals with denominator s. The
verdict engine turns the witnesses at the deepest scales of a prefix, plus a
growth estimate of the convergent denominators, into the label of the
transcendence criterion they satisfy. Verdicts are finite-prefix evidence,
never proofs.
"""

from __future__ import annotations

import bisect
import heapq
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from cf_core import GrowthEstimate, continuant
from utils import DEFAULT_T, fraction_to_json, to_fraction
from words import FiniteWord, WordStream

log = logging.getLogger(__name__)

CAVEAT = "finite-prefix evidence"
LOG_ROUNDING = 1e-12
MARGIN_DIGITS = 12
SCAN_CHUNK = 64

RULE_A_W2 = "TheoremA_w2"
RULE_A_BOUNDED = "TheoremA_bounded"
RULE_31 = "Theorem31"
RULE_B = "TheoremB"
RULE_INCONCLUSIVE = "Inconclusive"

# Which T witnesses certify a condition: the T largest periods, or the T largest exponents
SELECT_DEEPEST = "deepest"
SELECT_STRONGEST = "strongest"
SELECTIONS = (SELECT_DEEPEST, SELECT_STRONGEST)


class DetectorError(ValueError):
    """Invalid detector or scan parameters."""


class GrowthError(ValueError):
    """Degenerate growth estimate (M_hat or m_hat not above 1)."""


@dataclass(frozen=True)
class RepetitionWitness:
    """
    The scanned word begins with U V^w, |U| = r, |V| = s.

    Attributes:
        r: Offset |U|
        s: Period |V|
        w: Maximal exponent within the scanned prefix, denominator s
    """

    r: int
    s: int
    w: Fraction

    @property
    def extension(self) -> int:
        """Letters matched beyond the first copy of V."""
        return int(self.w * self.s) - self.s

    @property
    def end(self) -> int:
        """Length of the prefix U V^w."""
        return self.r + int(self.w * self.s)

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.r, self.s)

    def to_dict(self) -> dict:
        return {"r": self.r, "s": self.s, "w_num": self.w.numerator, "w_den": self.w.denominator}


@dataclass
class ConditionReport:
    """
    Evidence for the stammering conditions found in one prefix.

    Attributes:
        witnesses: One witness per scale, s strictly increasing
        T: Number of scales required
        prefix_len: Letters scanned
        star_w: Exponent certified by T offset-zero witnesses, if any
        star_witnesses: Those T witnesses
        starstar: (w, w') certified by T witnesses with r/s <= w', if any
        starstar_witnesses: Those T witnesses
        selection: How the T witnesses were picked, deepest or strongest
    """

    witnesses: List[RepetitionWitness]
    T: int
    prefix_len: int
    star_w: Optional[Fraction] = None
    star_witnesses: List[RepetitionWitness] = field(default_factory=list)
    starstar: Optional[Tuple[Fraction, Fraction]] = None
    starstar_witnesses: List[RepetitionWitness] = field(default_factory=list)
    selection: str = SELECT_DEEPEST

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "prefix_len": self.prefix_len,
            "selection": self.selection,
            "star_w": fraction_to_json(self.star_w),
            "star_scales": [w.s for w in self.star_witnesses],
            "starstar": None if self.starstar is None else {
                "w": fraction_to_json(self.starstar[0]),
                "w_prime": fraction_to_json(self.starstar[1]),
            },
            "starstar_scales": [w.s for w in self.starstar_witnesses],
        }


@dataclass(frozen=True)
class CriterionVerdict:
    """
    The criterion a prefix satisfies, with the numbers behind it.

    Attributes:
        rule: TheoremA_w2, TheoremA_bounded, Theorem31, TheoremB or Inconclusive
        w: Exponent used
        w_prime: Offset ratio bound used (0 for offset-zero rules)
        M_hat: Growth estimate of limsup q_l^(1/l)
        m_hat: Growth estimate of liminf q_l^(1/l)
        margin: Left side minus right side of the applied inequality
        caveat: Always notes the finite-prefix nature of the evidence
        periodic: (preperiod, period) when the prefix looked eventually periodic
        assumed_convergent: rho = log M / log m was taken as exactly 1
    """

    rule: str
    w: Optional[Fraction]
    w_prime: Optional[Fraction]
    M_hat: Optional[float]
    m_hat: Optional[float]
    margin: Optional[float]
    caveat: str = CAVEAT
    periodic: Optional[Tuple[int, int]] = None
    assumed_convergent: bool = False

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "w": fraction_to_json(self.w),
            "w_prime": fraction_to_json(self.w_prime),
            "margin": self.margin,
            "caveat": self.caveat,
            "periodic": None if self.periodic is None else list(self.periodic),
            "assumed_convergent": self.assumed_convergent,
        }


# ==================== DETECTION ====================


def _as_prefix(word: Union[WordStream, FiniteWord, Sequence[int]], prefix_len: int) -> FiniteWord:
    if isinstance(word, WordStream):
        return word.take(prefix_len)
    letters = tuple(word)
    if len(letters) < prefix_len:
        raise DetectorError(f"word has {len(letters)} letters, {prefix_len} requested")
    return FiniteWord(letters[:prefix_len])


def z_function(letters: Sequence[int]) -> List[int]:
    """
    z[i] = length of the longest common prefix of the word and its suffix at i.

    z[0] is set to the word length.
    """
    n = len(letters)
    z = [0] * n
    if n:
        z[0] = n
    left = right = 0
    for i in range(1, n):
        if i < right:
            z[i] = min(right - i, z[i - left])
        while i + z[i] < n and letters[z[i]] == letters[i + z[i]]:
            z[i] += 1
        if i + z[i] > right:
            left, right = i, i + z[i]
    return z


def _ceil_mul(x: Fraction, s: int) -> int:
    return -(-x.numerator * s // x.denominator)


def detect_repetitions(
    prefix: Union[FiniteWord, Sequence[int]], max_r: int, min_w: Union[Fraction, int, str]
) -> List[RepetitionWitness]:
    """
    Find the U V^w prefixes of a word.

    For every offset r <= max_r and period s with r + min_w * s <= |prefix|,
    the exponent w is maximal such that positions r..r + ws - 1 are
    s-periodic. A witness is kept when w >= min_w and no witness with the
    same s and a smaller r reaches w or more.

    The offset-zero scan is linear. With offsets, each period compares
    letters only up to the first mismatch at or after offset max_r, so the
    cost is O(|prefix| * max_r) plus the total length of the repetitions
    that run past max_r.

    Args:
        prefix: Scanned word
        max_r: Largest offset, below the prefix length
        min_w: Least exponent reported, above 1

    Returns:
        List[RepetitionWitness]: Sorted by (s, r)

    Raises:
        DetectorError: On an empty prefix or out-of-range parameters
    """
    letters = tuple(prefix)
    n = len(letters)
    min_w = to_fraction(min_w)
    if n == 0:
        raise DetectorError("cannot scan an empty prefix")
    if not 0 <= max_r < n:
        raise DetectorError(f"max_r must lie in [0, {n - 1}], got {max_r}")
    if min_w <= 1:
        raise DetectorError(f"min_w must exceed 1, got {min_w}")

    witnesses: List[RepetitionWitness] = []
    if max_r == 0:
        z = z_function(letters)
        for s in range(1, n):
            if min_w * s > n:
                break
            if s + z[s] >= _ceil_mul(min_w, s):
                witnesses.append(RepetitionWitness(0, s, Fraction(s + z[s], s)))
        log.debug("offset-zero scan of %d letters: %d witnesses", n, len(witnesses))
        return witnesses

    x = np.asarray(letters, dtype=np.int64)
    for s in range(1, n):
        r_hi = min(max_r, math.floor(n - min_w * s))
        if r_hi < 0:
            break
        # only mismatches up to the first one at or after r_hi are needed
        limit = min(n - s, r_hi + 1 + SCAN_CHUNK)
        while True:
            mismatches = np.flatnonzero(x[s:s + limit] != x[:limit])
            if limit == n - s or (mismatches.size and mismatches[-1] >= r_hi):
                break
            limit = min(n - s, 2 * limit)
        # lce[r] = longest common extension of positions r and r + s
        stops = np.append(mismatches, n - s)
        offsets = np.arange(r_hi + 1)
        lce = stops[np.searchsorted(mismatches, offsets)] - offsets
        best_before = np.maximum.accumulate(np.concatenate(([-1], lce[:-1])))
        keep = (lce > best_before) & (lce + s >= _ceil_mul(min_w, s))
        for r in np.flatnonzero(keep):
            witnesses.append(RepetitionWitness(int(r), s, Fraction(s + int(lce[r]), s)))
    log.debug("scan of %d letters up to offset %d: %d witnesses", n, max_r, len(witnesses))
    return witnesses


def _tail(witnesses: List[RepetitionWitness], T: int, selection: str = SELECT_DEEPEST) -> List[RepetitionWitness]:
    if selection == SELECT_STRONGEST:
        return sorted(heapq.nlargest(T, witnesses, key=lambda w: (w.w, w.s)), key=lambda w: w.s)
    return sorted(witnesses, key=lambda w: w.s)[-T:]


def _check_scan(prefix_len: int, T: int, selection: str = SELECT_DEEPEST) -> None:
    if prefix_len < 10:
        raise DetectorError(f"prefix_len must be >= 10, got {prefix_len}")
    if T < 3:
        raise DetectorError(f"T must be >= 3, got {T}")
    if selection not in SELECTIONS:
        raise DetectorError(f"selection must be one of {', '.join(SELECTIONS)}, got {selection!r}")


def condition_star(
    word: Union[WordStream, FiniteWord, Sequence[int]],
    prefix_len: int,
    T: Optional[int] = None,
    min_w: Union[Fraction, int, str] = Fraction(9, 8),
    selection: str = SELECT_DEEPEST,
) -> ConditionReport:
    """
    Offset-zero stammering: the word begins with V_n^w at T scales.

    The condition is evaluated on T offset-zero witnesses and star_w is the
    least exponent among them. With the deepest selection those are the T
    largest periods. With the strongest selection they are the T largest
    exponents, so star_w is the largest w that at least T witnesses reach.

    Args:
        word: Stream or finite word
        prefix_len: Letters scanned, at least 10
        T: Scales required, at least 3; defaults to CF_DEFAULT_T
        min_w: Least exponent considered
        selection: "deepest" or "strongest"

    Returns:
        ConditionReport: With star_w absent when fewer than T witnesses exist
    """
    T = DEFAULT_T if T is None else T
    _check_scan(prefix_len, T, selection)
    prefix = _as_prefix(word, prefix_len)
    witnesses = detect_repetitions(prefix, 0, min_w)
    report = ConditionReport(witnesses=witnesses, T=T, prefix_len=prefix_len, selection=selection)
    _fill_star(report, witnesses)
    return report


def _fill_star(report: ConditionReport, witnesses: Iterable[RepetitionWitness]) -> None:
    offset_zero = [w for w in witnesses if w.r == 0]
    if len(offset_zero) >= report.T:
        report.star_witnesses = _tail(offset_zero, report.T, report.selection)
        report.star_w = min(w.w for w in report.star_witnesses)
        log.info("condition (*) holds with w=%s at scales %s", report.star_w, [w.s for w in report.star_witnesses])
    else:
        log.info("condition (*): %d offset-zero witnesses, %d needed", len(offset_zero), report.T)


def condition_star_star(
    word: Union[WordStream, FiniteWord, Sequence[int]],
    prefix_len: int,
    T: Optional[int] = None,
    min_w: Union[Fraction, int, str] = Fraction(5, 4),
    max_wprime: Union[Fraction, int, str] = 1,
    max_r: Optional[int] = None,
    selection: str = SELECT_DEEPEST,
) -> ConditionReport:
    """
    Stammering with offsets: U_n V_n^w prefixes with |U_n|/|V_n| <= w'.

    Every distinct ratio r/s up to max_wprime is a candidate bound w'. For a
    candidate, the best exponent per period among witnesses within the bound
    forms a pool. T witnesses of the pool, its largest periods or its largest
    exponents depending on `selection`, give the pair (least exponent,
    largest ratio). The pair with the largest w wins, then the smallest w'.

    Args:
        word: Stream or finite word
        prefix_len: Letters scanned, at least 10
        T: Scales required, at least 3; defaults to CF_DEFAULT_T
        min_w: Least exponent considered
        max_wprime: Largest ratio r/s considered, non-negative
        max_r: Largest offset scanned; defaults to the largest offset that
            can meet both bounds, floor(max_wprime * prefix_len / min_w)
        selection: "deepest" or "strongest"

    Returns:
        ConditionReport: Pool of the winning bound, both conditions filled when found
    """
    T = DEFAULT_T if T is None else T
    _check_scan(prefix_len, T, selection)
    min_w = to_fraction(min_w)
    max_wprime = to_fraction(max_wprime)
    if max_wprime < 0:
        raise DetectorError(f"max_wprime must be non-negative, got {max_wprime}")
    if max_r is None:
        max_r = math.floor(max_wprime * prefix_len / min_w)
    max_r = min(max_r, prefix_len - 1)

    prefix = _as_prefix(word, prefix_len)
    detected = [w for w in detect_repetitions(prefix, max_r, min_w) if w.ratio <= max_wprime]

    by_ratio: Dict[Fraction, List[RepetitionWitness]] = {}
    for witness in detected:
        by_ratio.setdefault(witness.ratio, []).append(witness)

    best: Dict[int, RepetitionWitness] = {}
    top: List[int] = []
    choice: Optional[Tuple[Fraction, Fraction]] = None
    choice_pool: Dict[int, RepetitionWitness] = {}
    choice_tail: List[RepetitionWitness] = []
    for ratio in sorted(by_ratio):
        for witness in by_ratio[ratio]:
            current = best.get(witness.s)
            if current is None:
                if len(top) < T:
                    bisect.insort(top, witness.s)
                elif witness.s > top[0]:
                    top.pop(0)
                    bisect.insort(top, witness.s)
            if current is None or witness.w > current.w:
                best[witness.s] = witness
        if len(top) < T:
            continue
        tail = [best[s] for s in top] if selection == SELECT_DEEPEST else _tail(list(best.values()), T, selection)
        pair = (min(w.w for w in tail), max(w.ratio for w in tail))
        if choice is None or pair[0] > choice[0] or (pair[0] == choice[0] and pair[1] < choice[1]):
            choice, choice_tail, choice_pool = pair, tail, dict(best)

    report = ConditionReport(
        witnesses=[choice_pool[s] for s in sorted(choice_pool)] if choice else [best[s] for s in sorted(best)],
        T=T,
        prefix_len=prefix_len,
        starstar=choice,
        starstar_witnesses=choice_tail,
        selection=selection,
    )
    _fill_star(report, detected)
    if choice:
        log.info("condition (**) holds with (w, w')=(%s, %s) at scales %s", choice[0], choice[1], [w.s for w in choice_tail])
    else:
        log.info("condition (**): fewer than %d scales within w' <= %s", T, max_wprime)
    return report


def periodicity_scan(
    word: Union[WordStream, FiniteWord, Sequence[int]], prefix_len: int, max_period: int, max_preperiod: int
) -> Optional[Tuple[int, int]]:
    """
    Look for an eventual period within a prefix.

    Returns:
        The least (preperiod, period) consistent with the whole prefix, or
        None; None only means no period <= max_period with preperiod <=
        max_preperiod fits this prefix

    Raises:
        DetectorError: If max_preperiod + 2 * max_period exceeds prefix_len
    """
    if max_period < 1 or max_preperiod < 0:
        raise DetectorError("max_period must be positive and max_preperiod non-negative")
    if max_preperiod + 2 * max_period > prefix_len:
        raise DetectorError(
            f"max_preperiod + 2 * max_period = {max_preperiod + 2 * max_period} exceeds prefix_len {prefix_len}"
        )
    x = np.asarray(_as_prefix(word, prefix_len).letters, dtype=np.int64)
    found: Optional[Tuple[int, int]] = None
    for period in range(1, max_period + 1):
        mismatches = np.flatnonzero(x[period:] != x[:-period])
        preperiod = int(mismatches[-1]) + 1 if mismatches.size else 0
        if preperiod <= max_preperiod and (found is None or (preperiod, period) < found):
            found = (preperiod, period)
    if found:
        log.info("prefix of %d letters is eventually periodic: preperiod %d, period %d", prefix_len, *found)
    return found


# ==================== VERDICTS ====================


def rhs_theorem31(w_prime: Fraction, rho: float) -> float:
    """Right side w'(2 rho - 1) + 1, rho = log M / log m."""
    return float(w_prime) * (2 * rho - 1) + 1


def rhs_theorem_b(w_prime: Fraction, rho: float) -> float:
    """Right side w'(2 rho - 1) + rho, rho = log M / log m."""
    return float(w_prime) * (2 * rho - 1) + rho


def _round_margin(margin: float) -> float:
    return float(f"{margin:.{MARGIN_DIGITS}g}")


def criterion_verdict(
    report: ConditionReport,
    growth: GrowthEstimate,
    periodic: Optional[Tuple[int, int]] = None,
    bounded: bool = True,
    assume_convergent: bool = False,
) -> CriterionVerdict:
    """
    Apply the transcendence criteria to the evidence of a prefix.

    Rules are tried in order: an offset-zero exponent w >= 2; an offset-zero
    exponent w > 1 when the partial quotients are bounded; the offset pair
    (w, w') against w'(2 rho - 1) + 1; the same pair against
    w'(2 rho - 1) + rho. The ratio rho = log M_hat / log m_hat is bracketed
    with 1e-12 outward rounding on both logarithms, and a rule only fires
    when its inequality holds for the whole bracket.

    Args:
        report: Condition report of the prefix
        growth: Growth estimate from the same prefix's convergents
        periodic: Eventual period found in the prefix, if any
        bounded: True when the partial quotients are bounded
        assume_convergent: Treat rho as exactly 1 (growth known to converge)

    Returns:
        CriterionVerdict: The first rule that applies, or Inconclusive

    Raises:
        GrowthError: If M_hat or m_hat is not above 1
    """
    if periodic is not None:
        return CriterionVerdict(RULE_INCONCLUSIVE, None, None, growth.M_hat, growth.m_hat, None, periodic=periodic)
    if growth.M_hat <= 1 or growth.m_hat <= 1:
        raise GrowthError(f"degenerate growth estimate M_hat={growth.M_hat}, m_hat={growth.m_hat}")

    if assume_convergent:
        rho = rho_lo = rho_hi = 1.0
    else:
        rho = growth.log_M_hat / growth.log_m_hat
        rho_lo = growth.log_M_hat * (1 - LOG_ROUNDING) / (growth.log_m_hat * (1 + LOG_ROUNDING))
        rho_hi = growth.log_M_hat * (1 + LOG_ROUNDING) / (growth.log_m_hat * (1 - LOG_ROUNDING))
    log.debug("rho in [%.15g, %.15g]", rho_lo, rho_hi)

    def verdict(rule: str, w: Fraction, w_prime: Fraction, margin: float) -> CriterionVerdict:
        log.info("verdict %s: w=%s w'=%s margin=%.12g", rule, w, w_prime, margin)
        return CriterionVerdict(
            rule, w, w_prime, growth.M_hat, growth.m_hat, _round_margin(margin), assumed_convergent=assume_convergent
        )

    star_w = report.star_w
    if star_w is not None and star_w >= 2:
        return verdict(RULE_A_W2, star_w, Fraction(0), float(star_w - 1))
    if star_w is not None and star_w > 1 and bounded:
        return verdict(RULE_A_BOUNDED, star_w, Fraction(0), float(star_w - 1))
    if report.starstar is not None:
        w, w_prime = report.starstar
        if float(w) > rhs_theorem31(w_prime, rho_hi):
            return verdict(RULE_31, w, w_prime, float(w) - rhs_theorem31(w_prime, rho))
        if float(w) > rhs_theorem_b(w_prime, rho_hi):
            return verdict(RULE_B, w, w_prime, float(w) - rhs_theorem_b(w_prime, rho))
    log.info("verdict Inconclusive")
    if report.starstar is not None:
        best_w, best_wp = report.starstar
    elif star_w is not None:
        best_w, best_wp = star_w, Fraction(0)
    else:
        best_w = best_wp = None
    return CriterionVerdict(
        RULE_INCONCLUSIVE, best_w, best_wp, growth.M_hat, growth.m_hat, None, assumed_convergent=assume_convergent
    )


# ==================== WITNESS CHECKS ====================


def prefix_continuants(prefix: Union[FiniteWord, Sequence[int]]) -> List[int]:
    """q_0..q_n of [0; prefix], q_l = K(prefix[:l])."""
    qs = [1]
    q_prev = 0
    for a in prefix:
        q_prev, q = qs[-1], a * qs[-1] + q_prev
        qs.append(q)
    return qs


def witness_continuant_check(
    prefix: Union[FiniteWord, Sequence[int]], witness: RepetitionWitness, qs: Optional[Sequence[int]] = None
) -> Tuple[int, int, bool]:
    """
    Exact check of q_{r+s} q_{r+floor((w-1)s)} <= 4 q_r q_{r+floor(ws)}.

    Args:
        prefix: The scanned word
        witness: A witness found in it
        qs: Precomputed prefix continuants, when several witnesses are checked

    Returns:
        Tuple of (lhs, rhs, lhs <= rhs)
    """
    r, s, ext = witness.r, witness.s, witness.extension
    if qs is None:
        letters = tuple(prefix)

        def q(length: int) -> int:
            return continuant(letters[:length])
    else:
        def q(length: int) -> int:
            return qs[length]

    lhs = q(r + s) * q(r + ext)
    rhs = 4 * q(r) * q(r + s + ext)
    return lhs, rhs, lhs <= rhs


def verify_witness(prefix: Union[FiniteWord, Sequence[int]], witness: RepetitionWitness) -> bool:
    """
    Letterwise recheck of a witness: U V^w is a prefix, and one more letter
    of period s either leaves the prefix or breaks the periodicity.
    """
    letters = tuple(prefix)
    r, s, end = witness.r, witness.s, witness.end
    if (witness.w * s).denominator != 1 or end > len(letters):
        return False
    if any(letters[i] != letters[i + s] for i in range(r, end - s)):
        return False
    return end == len(letters) or letters[end - s] != letters[end]


def format_witnesses(report: ConditionReport) -> str:
    """Render witnesses as `r s w_num/w_den` lines followed by a summary block."""
    lines = [f"{w.r} {w.s} {w.w.numerator}/{w.w.denominator}" for w in report.witnesses]
    lines.append(f"# prefix_len {report.prefix_len}")
    lines.append(f"# T {report.T}")
    lines.append(f"# star_w {report.star_w if report.star_w is not None else '-'}")
    if report.starstar is not None:
        lines.append(f"# starstar {report.starstar[0]} {report.starstar[1]}")
    else:
        lines.append("# starstar -")
    return "\n".join(lines) + "\n"


def reference_repetitions(
    prefix: Union[FiniteWord, Sequence[int]], max_r: int, min_w: Union[Fraction, int, str]
) -> List[RepetitionWitness]:
    """
    Letter-by-letter scan with the output contract of `detect_repetitions`.

    Cubic in the prefix length; used to cross-check the fast detector.
    """
    letters = tuple(prefix)
    n = len(letters)
    min_w = to_fraction(min_w)
    witnesses = []
    for s in range(1, n):
        best = -1
        for r in range(0, max_r + 1):
            if r + min_w * s > n:
                break
            extension = 0
            while r + s + extension < n and letters[r + extension] == letters[r + s + extension]:
                extension += 1
            if extension > best:
                best = extension
                w = Fraction(s + extension, s)
                if w >= min_w:
                    witnesses.append(RepetitionWitness(r, s, w))
    return witnesses
