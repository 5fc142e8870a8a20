"""
Exact continued-fraction arithmetic.

Convergents and continuants are exact big integers; only the growth estimate
leaves exact arithmetic, and it works with mpmath logarithms so that
denominators with thousands of digits never overflow.
"""

from __future__ import annotations

import bisect
import csv
import itertools
import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, TextIO, Tuple, Union

from mpmath import mp

from utils import DEFAULT_TAIL_FRACTION
from words import FiniteWord, WordStream

log = logging.getLogger(__name__)

# Words longer than this use the divide-and-conquer matrix product
MATRIX_PATH_THRESHOLD = 10_000
MIN_GROWTH_CONVERGENTS = 10

Mat2Tuple = Tuple[int, int, int, int]


class ExpansionExhausted(ValueError):
    """The partial-quotient stream ended: the expansion is rational."""


class ContinuantError(ValueError):
    """Invalid partial quotient or continuant input."""


@dataclass(frozen=True)
class Convergent:
    """
    The convergent p/q obtained by truncating after `index` partial quotients.

    Attributes:
        index: Number of partial quotients used
        p: Numerator
        q: Denominator, positive
    """

    index: int
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class RationalInterval:
    """Open interval with exact rational endpoints, lo < hi."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"empty interval ({self.lo}, {self.hi})")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, value: object) -> bool:
        return self.lo < value < self.hi  # type: ignore[operator]


@dataclass(frozen=True)
class GrowthEstimate:
    """
    Windowed estimates of limsup and liminf of q_l^(1/l).

    Attributes:
        M_hat: Largest sample in the window
        m_hat: Smallest sample in the window
        window_start: First index of the window
        window_end: Last index of the window
        samples: q_l^(1/l) for l = window_start..window_end
        log_M_hat: log of M_hat, computed in the log domain
        log_m_hat: log of m_hat, computed in the log domain
    """

    M_hat: float
    m_hat: float
    window_start: int
    window_end: int
    samples: Tuple[float, ...] = field(repr=False)
    log_M_hat: float = 0.0
    log_m_hat: float = 0.0

    def to_dict(self) -> dict:
        return {
            "M_hat": self.M_hat,
            "m_hat": self.m_hat,
            "window": [self.window_start, self.window_end],
        }


class CFExpansion:
    """
    The continued fraction [0; a_1, a_2, ...] of a partial-quotient stream.

    Partial quotients and convergents are pulled from the stream on demand
    and cached, so repeated queries (floor computations, convergent dumps)
    never re-read the stream.
    """

    def __init__(self, partial_quotients: Union[WordStream, Iterable[int]], name: str = "cf"):
        if not isinstance(partial_quotients, WordStream):
            partial_quotients = WordStream(iter(partial_quotients), name=name)
        self._stream = partial_quotients
        self.name = name
        self._quotients: List[int] = []
        # _p[i], _q[i] hold p_{i-1}, q_{i-1}
        self._p: List[int] = [1, 0]
        self._q: List[int] = [0, 1]

    @classmethod
    def periodic(cls, preperiod: Sequence[int], period: Sequence[int], name: Optional[str] = None) -> "CFExpansion":
        """Eventually periodic expansion [0; preperiod, (period) repeated]."""
        if not period:
            raise ContinuantError("period must be non-empty")
        for a in itertools.chain(preperiod, period):
            if int(a) < 1:
                raise ContinuantError(f"partial quotients must be >= 1, got {a}")
        label = name or _describe_periodic(preperiod, period)
        stream = itertools.chain(tuple(preperiod), itertools.cycle(tuple(period)))
        return cls(WordStream(stream, name=label), name=label)

    @classmethod
    def from_word(cls, word: Union[FiniteWord, Sequence[int]], name: str = "word") -> "CFExpansion":
        """Finite expansion; reading past its end raises ExpansionExhausted."""
        return cls(WordStream(iter(tuple(word)), name=name), name=name)

    @property
    def pulled(self) -> int:
        """Number of partial quotients read so far."""
        return len(self._quotients)

    def _extend(self, count: int) -> None:
        while len(self._quotients) < count:
            try:
                a = int(next(self._stream))
            except StopIteration:
                raise ExpansionExhausted(
                    f"{self.name}: expansion ends after {len(self._quotients)} partial quotients, "
                    f"{count} needed"
                ) from None
            if a < 1:
                raise ContinuantError(f"{self.name}: partial quotient a_{len(self._quotients) + 1} = {a} < 1")
            self._quotients.append(a)
            self._p.append(a * self._p[-1] + self._p[-2])
            self._q.append(a * self._q[-1] + self._q[-2])

    def index_above(self, bound: int) -> int:
        """Least index l >= 0 with q_l > bound."""
        while self._q[-1] <= bound:
            self._extend(len(self._quotients) + 1)
        return bisect.bisect_right(self._q, bound) - 1

    def quotient(self, index: int) -> int:
        """Partial quotient a_index, index >= 1."""
        if index < 1:
            raise ValueError(f"partial quotients are indexed from 1, got {index}")
        self._extend(index)
        return self._quotients[index - 1]

    def convergent(self, index: int) -> Convergent:
        """Convergent p_index/q_index, index >= -1."""
        if index < -1:
            raise ValueError(f"convergent index must be >= -1, got {index}")
        self._extend(index)
        return Convergent(index, self._p[index + 1], self._q[index + 1])

    def q(self, index: int) -> int:
        self._extend(index)
        return self._q[index + 1]

    def p(self, index: int) -> int:
        self._extend(index)
        return self._p[index + 1]

    def __repr__(self) -> str:
        return f"CFExpansion({self.name}, pulled={self.pulled})"


def _describe_periodic(preperiod: Sequence[int], period: Sequence[int]) -> str:
    head = ",".join(str(a) for a in preperiod)
    cycle = ",".join(str(a) for a in period)
    return f"[0;{head + ',' if head else ''}({cycle})]"


# ==================== THETA DESCRIPTORS ====================

NAMED_THETAS = {
    "golden": ((), (1,)),
    "silver": ((), (2,)),
}

_PERIODIC_RE = re.compile(r"^\[0;([0-9,\s]*?)\(([0-9,\s]+)\)\]$")


def parse_theta(descriptor: str) -> CFExpansion:
    """
    Build a quadratic irrational from a descriptor.

    Accepted forms are the names `golden` ([0;1,1,...]) and `silver`
    ([0;2,2,...]), or a bracket pattern such as `[0;1,(2)]` whose
    parenthesised group repeats forever.

    Raises:
        ValueError: If the descriptor is not recognised
    """
    text = descriptor.strip()
    if text.lower() in NAMED_THETAS:
        preperiod, period = NAMED_THETAS[text.lower()]
        return CFExpansion.periodic(preperiod, period, name=text.lower())
    match = _PERIODIC_RE.match(text.replace(" ", ""))
    if not match:
        raise ValueError(f"unrecognised theta descriptor {descriptor!r}; use golden, silver or [0;a,(b,c)]")
    preperiod = [int(x) for x in match.group(1).split(",") if x]
    period = [int(x) for x in match.group(2).split(",") if x]
    return CFExpansion.periodic(preperiod, period)


# ==================== CONVERGENTS AND CONTINUANTS ====================


def convergents(cf: CFExpansion, L: int) -> List[Convergent]:
    """
    Convergents p_l/q_l for l = 0..L.

    Args:
        cf: The expansion
        L: Last index, at least 1

    Returns:
        List[Convergent]: L + 1 convergents starting at (p_0, q_0) = (0, 1)

    Raises:
        ExpansionExhausted: If the stream has fewer than L partial quotients
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    cf.convergent(L)
    return [cf.convergent(index) for index in range(L + 1)]


def _validate_letters(word: Sequence[int]) -> Tuple[int, ...]:
    letters = tuple(int(a) for a in word)
    for a in letters:
        if a < 1:
            raise ContinuantError(f"continuant letters must be >= 1, got {a}")
    return letters


def _matrix_product(letters: Sequence[int], lo: int, hi: int) -> Mat2Tuple:
    if hi - lo <= 32:
        a, b, c, d = 1, 0, 0, 1
        for x in letters[lo:hi]:
            # (a b; c d) * (x 1; 1 0)
            a, b, c, d = a * x + b, a, c * x + d, c
        return a, b, c, d
    mid = (lo + hi) // 2
    a1, b1, c1, d1 = _matrix_product(letters, lo, mid)
    a2, b2, c2, d2 = _matrix_product(letters, mid, hi)
    return (a1 * a2 + b1 * c2, a1 * b2 + b1 * d2, c1 * a2 + d1 * c2, c1 * b2 + d1 * d2)


def continuant_matrix(word: Union[FiniteWord, Sequence[int]]) -> Mat2Tuple:
    """
    Row-major product of the matrices [[a, 1], [1, 0]] over the word.

    For W = a_1..a_m the product is
    [[K(a_1..a_m), K(a_1..a_{m-1})], [K(a_2..a_m), K(a_2..a_{m-1})]].
    Computed by divide and conquer so that the big multiplications stay
    balanced.
    """
    letters = _validate_letters(word)
    return _matrix_product(letters, 0, len(letters))


def continuant(word: Union[FiniteWord, Sequence[int]]) -> int:
    """
    Continuant K(W), the denominator of [0; W].

    Args:
        word: Letters a_1..a_m, each >= 1; the empty word gives 1

    Returns:
        int: K(W)

    Raises:
        ContinuantError: If a letter is below 1
    """
    letters = _validate_letters(word)
    if len(letters) > MATRIX_PATH_THRESHOLD:
        return _matrix_product(letters, 0, len(letters))[0]
    q_prev, q = 0, 1
    for a in letters:
        q_prev, q = q, a * q + q_prev
    return q


def eval_interval(cf: CFExpansion, L: int) -> RationalInterval:
    """
    Bracket the value of the expansion between its convergents L-1 and L.

    Raises:
        ValueError: If L < 2
        ExpansionExhausted: If the stream is too short
    """
    if L < 2:
        raise ValueError(f"L must be >= 2, got {L}")
    a = cf.convergent(L - 1).value
    b = cf.convergent(L).value
    return RationalInterval(min(a, b), max(a, b))


def growth_estimate(qs: Sequence[Convergent], tail_fraction: Optional[float] = None) -> GrowthEstimate:
    """
    Estimate M = limsup q_l^(1/l) and m = liminf q_l^(1/l).

    The samples are taken over the trailing `tail_fraction` of the indices
    l = 1..L; the earlier indices are burn-in.

    Args:
        qs: Convergents, as returned by `convergents`
        tail_fraction: Share of indices kept, in (0, 1); defaults to CF_TAIL_FRACTION

    Returns:
        GrowthEstimate: Window extrema and samples

    Raises:
        ValueError: With fewer than 10 convergents or a bad tail fraction
    """
    tail_fraction = _check_tail_fraction(tail_fraction)
    indexed = sorted((c for c in qs if c.index >= 1), key=lambda c: c.index)
    if len(indexed) < MIN_GROWTH_CONVERGENTS:
        raise ValueError(
            f"growth estimate needs at least {MIN_GROWTH_CONVERGENTS} convergents, got {len(indexed)}"
        )
    size = max(1, int(len(indexed) * tail_fraction))
    return _estimate_from_window([(c.index, c.q) for c in indexed[-size:]])


def growth_estimate_from_word(word: Union[FiniteWord, Sequence[int]], tail_fraction: Optional[float] = None) -> GrowthEstimate:
    """
    Same estimate as `growth_estimate`, walking the recurrence once.

    Only the denominators inside the window are kept, so prefixes of
    10^5 letters never hold every convergent in memory.
    """
    tail_fraction = _check_tail_fraction(tail_fraction)
    letters = _validate_letters(word)
    if len(letters) < MIN_GROWTH_CONVERGENTS:
        raise ValueError(
            f"growth estimate needs at least {MIN_GROWTH_CONVERGENTS} convergents, got {len(letters)}"
        )
    start = len(letters) - max(1, int(len(letters) * tail_fraction)) + 1
    window = []
    q_prev, q = 0, 1
    for index, a in enumerate(letters, start=1):
        q_prev, q = q, a * q + q_prev
        if index >= start:
            window.append((index, q))
    return _estimate_from_window(window)


def iter_convergents(word: Union[FiniteWord, Sequence[int]]) -> Iterator[Convergent]:
    """Yield the convergents of [0; word] for l = 0..|word| without caching them."""
    p_prev, p, q_prev, q = 1, 0, 0, 1
    yield Convergent(0, p, q)
    for index, a in enumerate(_validate_letters(word), start=1):
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        yield Convergent(index, p, q)


def _check_tail_fraction(tail_fraction: Optional[float]) -> float:
    tail_fraction = DEFAULT_TAIL_FRACTION if tail_fraction is None else float(tail_fraction)
    if not 0 < tail_fraction < 1:
        raise ValueError(f"tail_fraction must lie in (0, 1), got {tail_fraction}")
    return tail_fraction


def _estimate_from_window(window: Sequence[Tuple[int, int]]) -> GrowthEstimate:
    logs = [mp.log(q) / index for index, q in window]
    log_max = max(logs)
    log_min = min(logs)
    estimate = GrowthEstimate(
        M_hat=float(mp.exp(log_max)),
        m_hat=float(mp.exp(log_min)),
        window_start=window[0][0],
        window_end=window[-1][0],
        samples=tuple(float(mp.exp(x)) for x in logs),
        log_M_hat=float(log_max),
        log_m_hat=float(log_min),
    )
    log.debug(
        "growth window [%d, %d]: M_hat=%.12g m_hat=%.12g",
        estimate.window_start, estimate.window_end, estimate.M_hat, estimate.m_hat,
    )
    return estimate


def write_convergents_csv(rows: Iterable[Convergent], stream: TextIO) -> int:
    """
    Dump convergents as CSV with columns l, p, q, q^(1/l).

    The root column holds 15 significant digits and is empty for l = 0.

    Returns:
        int: Number of rows written
    """
    writer = csv.writer(stream)
    writer.writerow(["l", "p", "q", "q_root"])
    count = 0
    for c in rows:
        root = mp.nstr(mp.exp(mp.log(c.q) / c.index), 15) if c.index >= 1 else ""
        writer.writerow([c.index, c.p, c.q, root])
        count += 1
    return count


def q_digits(q: int) -> int:
    """Number of decimal digits of a positive integer, without str()."""
    digits = max(1, int(q.bit_length() * math.log10(2)))
    while digits > 1 and 10 ** (digits - 1) > q:
        digits -= 1
    while 10**digits <= q:
        digits += 1
    return digits
