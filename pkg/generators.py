"""
Sequence families as word streams.

Every family yields positive-integer letters that can be fed straight into a
continued fraction: Davison sequences driven by floor(n theta), the
Rudin-Shapiro and Baum-Sweet automatic sequences (direct binary definitions
plus their morphic presentations), general paperfolding sequences, perturbed
symmetry systems and the concatenated block families built from words with
equal letter counts.

The module also checks the floor-function identities for convergent
denominators exactly, and constructs the repetitions that make Davison
sequences stammer.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from cf_core import CFExpansion, parse_theta
from utils import to_fraction
from words import (
    Alphabet,
    FiniteWord,
    Letter,
    Morphism,
    SignedWord,
    WordStream,
    coding_apply,
    fixed_point_stream,
    fold_map,
    letter_counts,
    mirror,
)

log = logging.getLogger(__name__)

# Morphic presentations. Rudin-Shapiro uses the standard images; the
# displayed fixed point "1242434213..." does not match any iteration of them.
RS_MORPHISM = Morphism.from_images({1: (1, 2), 2: (1, 3), 3: (4, 2), 4: (4, 3)})
BS_MORPHISM = Morphism.from_images({1: (1, 2), 2: (3, 2), 3: (2, 4), 4: (4, 4)})

MODE_IDENTITY = "E"
MODE_MIRROR = "R"


class FamilyError(ValueError):
    """Invalid family parameters or a block violating a family constraint."""


# ==================== DAVISON SEQUENCES ====================


@dataclass(frozen=True)
class DavisonParams:
    """
    Parameters of d_n = 1 + (floor(n theta) mod k).

    Attributes:
        theta: Expansion of the irrational theta in (0, 1)
        k: Modulus, at least 2
    """

    theta: CFExpansion
    k: int

    def __post_init__(self) -> None:
        if self.k < 2:
            raise FamilyError(f"Davison modulus k must be >= 2, got {self.k}")


def floor_n_theta(theta: CFExpansion, n: int) -> int:
    """
    Exact floor(n theta) from the convergents of theta.

    Consecutive convergents bracket theta, so n p_j/q_j and n p_{j+1}/q_{j+1}
    bracket n theta; once their floors agree that floor is the answer. The
    search starts near q_j ~ sqrt(n), below which floors rarely agree.

    Args:
        theta: Expansion of theta in (0, 1)
        n: Non-negative integer

    Returns:
        int: floor(n theta)

    Raises:
        ExpansionExhausted: If theta is rational and runs out first
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n == 0:
        return 0
    j = max(0, theta.index_above(math.isqrt(n)) - 1)
    low = n * theta.p(j) // theta.q(j)
    while True:
        high = n * theta.p(j + 1) // theta.q(j + 1)
        if low == high:
            return low
        low = high
        j += 1


def davison_stream(params: DavisonParams) -> WordStream:
    """Stream d_1, d_2, ... with d_n = 1 + (floor(n theta) mod k)."""

    def letters() -> Iterator[Letter]:
        for n in itertools.count(1):
            yield 1 + floor_n_theta(params.theta, n) % params.k

    return WordStream(letters(), name=f"davison({params.theta.name}, k={params.k})")


@dataclass(frozen=True)
class ConstructedWitness:
    """An offset-zero repetition d_1..d_N followed by a prefix of itself."""

    n: int
    case: str
    period: int
    extension: int

    @property
    def exponent(self) -> Fraction:
        return Fraction(self.period + self.extension, self.period)


def davison_witnesses(params: DavisonParams, n_from: int, n_to: int) -> List[ConstructedWitness]:
    """
    Build the repetitions that make a Davison sequence stammer.

    When a_{n+1} >= k, the word d_1..d_{k q_n} is followed by its own prefix
    of length q_n + q_{n-1} - 1 (exponent at least 1 + 1/k). Otherwise some
    block sum N = q_{n'} + ... + q_{n'+l} with n < n' and n' + l <= n + k has
    p_{n'} + ... + p_{n'+l} divisible by k, and d_1..d_N is followed by its
    prefix of length q_{n'+1} - 1 (exponent at least 1 + 1/k^k).

    Args:
        params: The Davison sequence
        n_from: First index n, at least 1
        n_to: Last index n

    Returns:
        List[ConstructedWitness]: One witness per n, periods deduplicated
    """
    theta, k = params.theta, params.k
    if n_from < 1:
        raise FamilyError("witness construction starts at n >= 1")
    found: Dict[int, ConstructedWitness] = {}
    for n in range(n_from, n_to + 1):
        if theta.quotient(n + 1) >= k:
            witness = ConstructedWitness(n, "large-quotient", k * theta.q(n), theta.q(n) + theta.q(n - 1) - 1)
        else:
            witness = _block_sum_witness(theta, k, n)
        if witness.period not in found:
            found[witness.period] = witness
    return sorted(found.values(), key=lambda w: w.period)


def _block_sum_witness(theta: CFExpansion, k: int, n: int) -> ConstructedWitness:
    for start in range(n + 1, n + k + 1):
        p_sum = 0
        q_sum = 0
        for end in range(start, n + k + 1):
            p_sum += theta.p(end)
            q_sum += theta.q(end)
            if p_sum % k == 0:
                return ConstructedWitness(n, "block-sum", q_sum, theta.q(start + 1) - 1)
    # unreachable: two of the k + 1 partial sums p_n + ... agree mod k
    raise FamilyError(f"no block sum divisible by {k} after n={n}")


# ==================== FLOOR IDENTITIES ====================


@dataclass
class FloorIdentityReport:
    """
    Outcome of the exact floor-identity checks.

    Attributes:
        checked: Tuples tested per identity
        passed: True when no identity failed
        first_failure: Description of the first counterexample, if any
    """

    checked: Dict[str, int] = field(default_factory=dict)
    passed: bool = True
    first_failure: Optional[dict] = None

    @property
    def total(self) -> int:
        return sum(self.checked.values())

    def to_dict(self) -> dict:
        return {"checked": dict(self.checked), "total": self.total, "passed": self.passed, "first_failure": self.first_failure}


def verify_floor_identities(theta: CFExpansion, n_max: int, cap: int) -> FloorIdentityReport:
    """
    Exhaustively check the floor identities of convergent denominators.

    Identities, each tested over its full range and truncated at `cap`
    tuples per identity:

    - floor((q_n + r) theta) = p_n + floor(r theta), n >= 0, 1 <= r <= q_{n+1} - 1
    - floor((s q_n + r) theta) = s p_n + floor(r theta), n >= 1,
      0 <= s <= a_{n+1}, 1 <= r <= q_n + q_{n-1} - 1
    - floor((q_{n+l} + ... + q_n + r) theta) = p_{n+l} + ... + p_n + floor(r theta),
      n >= 1, l >= 0, n + l <= n_max, 1 <= r <= q_{n+1} - 1

    Args:
        theta: Expansion of theta
        n_max: Largest n (and n + l) tested, at least 1
        cap: Maximum number of tuples per identity

    Returns:
        FloorIdentityReport: Counts and the first counterexample, if any
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    memo: Dict[int, int] = {}

    def floor_of(m: int) -> int:
        if m not in memo:
            memo[m] = floor_n_theta(theta, m)
        return memo[m]

    report = FloorIdentityReport()
    cases = {
        "shift": _shift_cases(theta, n_max),
        "multiple_shift": _multiple_shift_cases(theta, n_max),
        "sum_shift": _sum_shift_cases(theta, n_max),
    }
    for identity, tuples in cases.items():
        report.checked[identity] = 0
        for m, offset, r, where in itertools.islice(tuples, cap):
            report.checked[identity] += 1
            lhs, rhs = floor_of(m), offset + floor_of(r)
            if lhs != rhs and report.passed:
                report.passed = False
                report.first_failure = {"identity": identity, "lhs": lhs, "rhs": rhs, "r": r, **where}
                log.warning("floor identity %s failed at r=%d %s", identity, r, where)
    log.info("floor identities on %s: %s", theta.name, report.checked)
    return report


# Each case is (m, offset, r, where): the identity claims floor(m theta) = offset + floor(r theta)
FloorCase = Tuple[int, int, int, dict]


def _shift_cases(theta: CFExpansion, n_max: int) -> Iterator[FloorCase]:
    for n in range(0, n_max + 1):
        q_n, p_n = theta.q(n), theta.p(n)
        for r in range(1, theta.q(n + 1)):
            yield q_n + r, p_n, r, {"n": n}


def _multiple_shift_cases(theta: CFExpansion, n_max: int) -> Iterator[FloorCase]:
    for n in range(1, n_max + 1):
        q_n, p_n = theta.q(n), theta.p(n)
        for s in range(0, theta.quotient(n + 1) + 1):
            for r in range(1, q_n + theta.q(n - 1)):
                yield s * q_n + r, s * p_n, r, {"n": n, "s": s}


def _sum_shift_cases(theta: CFExpansion, n_max: int) -> Iterator[FloorCase]:
    for n in range(1, n_max + 1):
        q_sum = p_sum = 0
        for ell in range(0, n_max - n + 1):
            q_sum += theta.q(n + ell)
            p_sum += theta.p(n + ell)
            for r in range(1, theta.q(n + 1)):
                yield q_sum + r, p_sum, r, {"n": n, "l": ell}


# ==================== AUTOMATIC SEQUENCES ====================


def _check_pair(a: int, b: int) -> None:
    if a < 1 or b < 1:
        raise FamilyError(f"letters must be positive, got a={a}, b={b}")
    if a == b:
        raise FamilyError(f"letters a and b must differ, both are {a}")


def rudin_shapiro_bit(n: int) -> int:
    """Parity of the number of (overlapping) 11 blocks in binary n."""
    return bin(n & (n >> 1)).count("1") & 1


def has_odd_zero_block(n: int) -> bool:
    """True when binary n contains a maximal block of 0s of odd length; 0 has none."""
    while n:
        if n & 1:
            n >>= 1
            continue
        run = 0
        while not n & 1:
            n >>= 1
            run += 1
        if run & 1:
            return True
    return False


def rudin_shapiro_stream(a: int = 1, b: int = 2) -> WordStream:
    """Stream r_0, r_1, ...: a when binary n has an even number of 11 blocks, else b."""
    _check_pair(a, b)
    return WordStream((b if rudin_shapiro_bit(n) else a for n in itertools.count()), name="rudin-shapiro")


def baum_sweet_stream(a: int = 1, b: int = 2) -> WordStream:
    """Stream s_0, s_1, ...: a when binary n has an odd block of 0s, else b."""
    _check_pair(a, b)
    return WordStream((a if has_odd_zero_block(n) else b for n in itertools.count()), name="baum-sweet")


def morphic_rudin_shapiro_stream(a: int = 1, b: int = 2) -> WordStream:
    """Coding 1,2 -> a and 3,4 -> b of the fixed point of 1->12, 2->13, 3->42, 4->43."""
    _check_pair(a, b)
    phi = Morphism.from_images({1: (a,), 2: (a,), 3: (b,), 4: (b,)})
    return coding_apply(phi, fixed_point_stream(RS_MORPHISM, 1))


def morphic_baum_sweet_stream(a: int = 1, b: int = 2) -> WordStream:
    """Coding 1,2 -> b and 3,4 -> a of the fixed point of 1->12, 2->32, 3->24, 4->44."""
    _check_pair(a, b)
    phi = Morphism.from_images({1: (b,), 2: (b,), 3: (a,), 4: (a,)})
    return coding_apply(phi, fixed_point_stream(BS_MORPHISM, 1))


# ==================== PAPERFOLDING ====================


@dataclass(frozen=True)
class FoldingSystem:
    """
    Folding instructions e_0, e_1, ... and the letters coding +1 and -1.

    Instructions cycle through `pattern`, or are drawn from a seeded
    generator when `seed` is set.

    Attributes:
        letter_plus: Letter for +1
        letter_minus: Letter for -1
        pattern: Signs repeated cyclically
        seed: Seed of the pseudorandom instruction source
    """

    letter_plus: int = 1
    letter_minus: int = 2
    pattern: Tuple[int, ...] = (1,)
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        _check_pair(self.letter_plus, self.letter_minus)
        object.__setattr__(self, "pattern", SignedWord(tuple(self.pattern)).signs)
        if not self.pattern:
            raise FamilyError("folding pattern must be non-empty")

    def instructions(self) -> Iterator[int]:
        if self.seed is None:
            return itertools.cycle(self.pattern)
        rng = np.random.default_rng(self.seed)
        return (1 if bit else -1 for bit in iter(lambda: int(rng.integers(0, 2)), None))


def paperfolding_stream(system: FoldingSystem) -> WordStream:
    """
    Stream the limit of the iterated fold maps.

    With w_0 = F_{e_0}(empty) and w_n = F_{e_n}(w_{n-1}), every w_n is a
    prefix of w_{n+1} and has length 2^(n+1) - 1; letters are yielded as soon
    as they are produced.
    """
    code = {1: system.letter_plus, -1: system.letter_minus}

    def letters() -> Iterator[Letter]:
        signs: List[int] = []
        for e in system.instructions():
            produced = len(signs)
            signs.append(e)
            signs.extend(-x for x in reversed(signs[:produced]))
            for x in signs[produced:]:
                yield code[x]

    return WordStream(letters(), name="paperfolding")


def nested_fold(instructions: Sequence[int]) -> SignedWord:
    """Evaluate the fold maps directly, e_0 applied first."""
    word = SignedWord()
    for e in instructions:
        word = fold_map(e, word)
    return word


# ==================== PERTURBED SYMMETRIES ====================


@dataclass(frozen=True)
class PerturbedSymmetry:
    """
    The map S(W) = W X_1 W^{e_1} X_2 W^{e_2} ... X_k W^{e_k}.

    Attributes:
        inserts: Words X_1..X_k, possibly empty
        modes: E (identity) or R (mirror) for each insert
    """

    inserts: Tuple[FiniteWord, ...]
    modes: Tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "inserts", tuple(FiniteWord(tuple(x)) for x in self.inserts))
        object.__setattr__(self, "modes", tuple(m.upper() for m in self.modes))
        if not self.inserts or len(self.inserts) != len(self.modes):
            raise FamilyError("a perturbed symmetry needs equally many inserts and modes, at least one")
        for mode in self.modes:
            if mode not in (MODE_IDENTITY, MODE_MIRROR):
                raise FamilyError(f"mode must be E or R, got {mode!r}")

    @property
    def k(self) -> int:
        return len(self.inserts)

    def apply(self, word: FiniteWord) -> FiniteWord:
        reflected = mirror(word).letters
        out = list(word.letters)
        for insert, mode in zip(self.inserts, self.modes):
            out.extend(insert.letters)
            out.extend(word.letters if mode == MODE_IDENTITY else reflected)
        return FiniteWord(tuple(out))


@dataclass(frozen=True)
class PerturbedSystem:
    """
    A seed word and a schedule of perturbed symmetries applied to it.

    The schedule cycles through `schedule`, or is drawn from a seeded
    generator when `rng_seed` is set.

    Attributes:
        alphabet: Letters of the seed and inserts
        seed: Non-empty start word W
        symmetries: The available maps
        schedule: Indices into `symmetries`
        rng_seed: Seed of the pseudorandom schedule
    """

    alphabet: Alphabet
    seed: FiniteWord
    symmetries: Tuple[PerturbedSymmetry, ...]
    schedule: Tuple[int, ...] = (0,)
    rng_seed: Optional[int] = None

    def __post_init__(self) -> None:
        if not len(self.seed):
            raise FamilyError("perturbed systems need a non-empty seed word")
        if not self.symmetries:
            raise FamilyError("perturbed systems need at least one symmetry")
        if not self.schedule:
            raise FamilyError("schedule must be non-empty")
        for index in self.schedule:
            if not 0 <= index < len(self.symmetries):
                raise FamilyError(f"schedule index {index} outside 0..{len(self.symmetries) - 1}")
        used = set(self.seed.letters)
        for symmetry in self.symmetries:
            for insert in symmetry.inserts:
                used.update(insert.letters)
        outside = sorted(used - set(self.alphabet.letters))
        if outside:
            raise FamilyError(f"letters {outside} outside alphabet {self.alphabet.letters}")

    def choices(self) -> Iterator[int]:
        if self.rng_seed is None:
            return itertools.cycle(self.schedule)
        rng = np.random.default_rng(self.rng_seed)
        count = len(self.symmetries)
        return iter(lambda: int(rng.integers(0, count)), None)


def perturbed_symmetry_stream(system: PerturbedSystem) -> WordStream:
    """Stream the limit of W_{n+1} = S_n(W_n); each W_n is a prefix of the next."""

    def letters() -> Iterator[Letter]:
        word = system.seed
        yield from word.letters
        for index in system.choices():
            produced = len(word)
            word = system.symmetries[index].apply(word)
            yield from word.letters[produced:]

    return WordStream(letters(), name="perturbed")


# ==================== CONCATENATED BLOCKS ====================


def is_equal_count_word(word: Union[FiniteWord, Sequence[int]], alphabet: Alphabet) -> bool:
    """True when every letter of the alphabet occurs equally often and no other letter occurs."""
    counts = letter_counts(word)
    if set(counts) != set(alphabet.letters):
        return False
    return len(set(counts.values())) == 1


@dataclass(frozen=True)
class ConcatFamily:
    """
    The word W_1 W_2^2 W_3^2 ... built from equal-count blocks.

    Attributes:
        alphabet: Odd alphabet of size k >= 3
        blocks: Finite block sequence, or a factory returning a fresh block iterator
        lam: Growth factor, |W_{n+1}| > lam |W_n|
    """

    alphabet: Alphabet
    blocks: Union[Tuple[FiniteWord, ...], Callable[[], Iterator[FiniteWord]]]
    lam: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lam", to_fraction(self.lam))
        k = len(self.alphabet)
        if k < 3 or k % 2 == 0:
            raise FamilyError(f"alphabet size must be odd and >= 3, got {k}")
        if self.lam <= 1:
            raise FamilyError(f"lambda must exceed 1, got {self.lam}")
        if not callable(self.blocks):
            object.__setattr__(self, "blocks", tuple(FiniteWord(tuple(b)) for b in self.blocks))

    def iter_blocks(self) -> Iterator[FiniteWord]:
        """Yield the blocks, checking equal counts and growth lazily."""
        source = self.blocks() if callable(self.blocks) else iter(self.blocks)
        previous = 0
        for index, block in enumerate(source, start=1):
            block = FiniteWord(tuple(block))
            if not is_equal_count_word(block, self.alphabet):
                raise FamilyError(f"block W_{index} does not use every letter equally often")
            if previous and not len(block) > self.lam * previous:
                raise FamilyError(
                    f"block W_{index} has length {len(block)}, needs more than {self.lam} * {previous}"
                )
            previous = len(block)
            yield block


def concat_family_stream(family: ConcatFamily) -> WordStream:
    """Stream W_1 W_2 W_2 W_3 W_3 ..."""

    def letters() -> Iterator[Letter]:
        for index, block in enumerate(family.iter_blocks(), start=1):
            yield from block.letters
            if index > 1:
                yield from block.letters

    return WordStream(letters(), name="concat")


def random_equal_blocks(
    alphabet: Alphabet, lam: Union[Fraction, int, str], seed: int = 0, odd: bool = True
) -> Callable[[], Iterator[FiniteWord]]:
    """
    Pseudorandom source of equal-count blocks growing faster than lam.

    Each block length is the least multiple of k (odd multiple when `odd`)
    exceeding lam times the previous length, starting from k; letters are a
    uniform shuffle of the balanced multiset.

    Returns:
        Factory returning a fresh, reproducible block iterator
    """
    lam = to_fraction(lam)
    letters = np.array(alphabet.letters, dtype=np.int64)
    k = len(letters)

    def blocks() -> Iterator[FiniteWord]:
        rng = np.random.default_rng(seed)
        length = k
        while True:
            block = rng.permutation(np.repeat(letters, length // k))
            yield FiniteWord(tuple(int(x) for x in block))
            multiple = math.floor(lam * length / k) + 1
            if odd and multiple % 2 == 0:
                multiple += 1
            length = multiple * k

    return blocks


# ==================== FAMILY REGISTRY ====================


def _int_param(params: Mapping[str, str], key: str, default: Optional[int] = None) -> int:
    raw = params.get(key)
    if raw is None:
        if default is None:
            raise FamilyError(f"missing parameter {key}")
        return default
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise FamilyError(f"parameter {key} must be an integer, got {raw!r}") from None


def _letters_param(raw: str) -> Tuple[int, ...]:
    try:
        return tuple(int(x) for x in raw.replace(" ", ",").split(",") if x)
    except ValueError:
        raise FamilyError(f"expected comma-separated letters, got {raw!r}") from None


def _optional_seed(params: Mapping[str, str], key: str) -> Optional[int]:
    return _int_param(params, key) if params.get(key) not in (None, "") else None


def parse_signs(text: str) -> Tuple[int, ...]:
    """Parse a sign pattern such as `+-+` or `1,-1`."""
    text = text.strip()
    if text and set(text) <= {"+", "-"}:
        return tuple(1 if c == "+" else -1 for c in text)
    signs = _letters_param(text.replace("+", ""))
    SignedWord(signs)
    return signs


def parse_symmetries(text: str) -> Tuple[PerturbedSymmetry, ...]:
    """
    Parse symmetries written as `X:M/X:M;...`.

    Symmetries are separated by `;`, the (insert, mode) pairs of one symmetry
    by `/`, and each insert is a comma-separated word, possibly empty. For
    example `3:R` is S(W) = W 3 mirror(W).
    """
    symmetries = []
    for chunk in text.split(";"):
        inserts, modes = [], []
        for pair in chunk.split("/"):
            insert, sep, mode = pair.partition(":")
            if not sep:
                raise FamilyError(f"symmetry part {pair!r} needs the form letters:E or letters:R")
            inserts.append(FiniteWord(_letters_param(insert)))
            modes.append(mode.strip())
        symmetries.append(PerturbedSymmetry(tuple(inserts), tuple(modes)))
    return tuple(symmetries)


def _build_rudin_shapiro(params: Mapping[str, str]) -> WordStream:
    return rudin_shapiro_stream(_int_param(params, "a", 1), _int_param(params, "b", 2))


def _build_baum_sweet(params: Mapping[str, str]) -> WordStream:
    return baum_sweet_stream(_int_param(params, "a", 1), _int_param(params, "b", 2))


def _build_davison(params: Mapping[str, str]) -> WordStream:
    theta = parse_theta(params.get("theta", "golden"))
    return davison_stream(DavisonParams(theta, _int_param(params, "k", 2)))


def _build_paperfolding(params: Mapping[str, str]) -> WordStream:
    system = FoldingSystem(
        letter_plus=_int_param(params, "a", 1),
        letter_minus=_int_param(params, "b", 2),
        pattern=parse_signs(params.get("pattern", "+")),
        seed=_optional_seed(params, "seed"),
    )
    return paperfolding_stream(system)


def _build_perturbed(params: Mapping[str, str]) -> WordStream:
    seed_word = FiniteWord(_letters_param(params.get("word", "1,2")))
    symmetries = parse_symmetries(params.get("symmetries", "3:R"))
    letters = set(seed_word.letters)
    for symmetry in symmetries:
        for insert in symmetry.inserts:
            letters.update(insert.letters)
    alphabet = Alphabet(tuple(sorted(letters)))
    system = PerturbedSystem(
        alphabet=alphabet,
        seed=seed_word,
        symmetries=symmetries,
        schedule=_letters_param(params.get("schedule", "0")),
        rng_seed=_optional_seed(params, "seed"),
    )
    return perturbed_symmetry_stream(system)


def _build_concat(params: Mapping[str, str]) -> WordStream:
    alphabet = Alphabet(_letters_param(params.get("alphabet", "1,2,3")))
    lam = to_fraction(params.get("lam", "4"))
    blocks = random_equal_blocks(alphabet, lam, seed=_int_param(params, "seed", 0))
    return concat_family_stream(ConcatFamily(alphabet, blocks, lam))


def _perturbed_analysis(params: Mapping[str, str]) -> Tuple[Fraction, Fraction]:
    k = max(symmetry.k for symmetry in parse_symmetries(params.get("symmetries", "3:R")))
    return 1 + Fraction(1, 3 * k), Fraction(0)


def _davison_analysis(params: Mapping[str, str]) -> Tuple[Fraction, Fraction]:
    k = _int_param(params, "k", 2)
    return 1 + Fraction(1, k**k), Fraction(0)


def _concat_analysis(params: Mapping[str, str]) -> Tuple[Fraction, Fraction]:
    lam = to_fraction(params.get("lam", "4"))
    return Fraction(2), 2 / (lam - 1)


def _fixed_analysis(min_w: Fraction, max_wprime: Fraction) -> Callable[[Mapping[str, str]], Tuple[Fraction, Fraction]]:
    return lambda params: (min_w, max_wprime)


@dataclass(frozen=True)
class FamilySpec:
    """
    A named sequence family.

    Attributes:
        name: Registry key
        builder: Builds the stream from string parameters
        analysis: Maps parameters to the (min_w, max_wprime) the family's
            repetitions are known to reach
        growth_converges: True when q_l^(1/l) is known to converge for the family
        defaults: Parameter defaults, echoed in reports
    """

    name: str
    builder: Callable[[Mapping[str, str]], WordStream]
    analysis: Callable[[Mapping[str, str]], Tuple[Fraction, Fraction]]
    growth_converges: bool = False
    defaults: Mapping[str, str] = field(default_factory=dict)

    def analysis_defaults(self, params: Optional[Mapping[str, str]] = None) -> Tuple[Fraction, Fraction]:
        return self.analysis({**self.defaults, **(params or {})})


FAMILIES: Dict[str, FamilySpec] = {
    spec.name: spec
    for spec in (
        FamilySpec(
            "rudin-shapiro",
            _build_rudin_shapiro,
            _fixed_analysis(Fraction(9, 8), Fraction(0)),
            defaults={"a": "1", "b": "2"},
        ),
        FamilySpec(
            "baum-sweet",
            _build_baum_sweet,
            _fixed_analysis(Fraction(5, 4), Fraction(1, 6)),
            growth_converges=True,
            defaults={"a": "1", "b": "2"},
        ),
        FamilySpec("davison", _build_davison, _davison_analysis, defaults={"theta": "golden", "k": "2"}),
        FamilySpec(
            "paperfolding",
            _build_paperfolding,
            _fixed_analysis(Fraction(5, 4), Fraction(0)),
            defaults={"a": "1", "b": "2", "pattern": "+"},
        ),
        FamilySpec("perturbed", _build_perturbed, _perturbed_analysis, defaults={"word": "1,2", "symmetries": "3:R"}),
        FamilySpec("concat", _build_concat, _concat_analysis, defaults={"alphabet": "1,2,3", "lam": "4", "seed": "0"}),
    )
}


def build_family(name: str, params: Optional[Mapping[str, str]] = None) -> Tuple[WordStream, FamilySpec]:
    """
    Look up a family by name and build its stream.

    Args:
        name: Registry key, e.g. `baum-sweet`
        params: String parameters; missing ones take the family defaults

    Returns:
        Tuple of the stream and the family spec

    Raises:
        FamilyError: Unknown family or invalid parameters
    """
    try:
        spec = FAMILIES[name]
    except KeyError:
        raise FamilyError(f"unknown family {name!r}; known: {', '.join(sorted(FAMILIES))}") from None
    merged = {**spec.defaults, **{k: str(v) for k, v in (params or {}).items()}}
    log.debug("building family %s with %s", name, merged)
    return spec.builder(merged), spec
