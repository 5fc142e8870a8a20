"""
Growth of continuants over equal-count words, via 2x2 letter matrices.

Each letter b is the matrix [[b, 1], [1, 0]]; a word's continuant is the
top-left entry of the product of its letter matrices. Entries stay exact
integers, and only spectral radii, logarithms and the constant gamma = 0.885
go through mpmath.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from mpmath import mp

from cf_core import continuant
from generators import ConcatFamily, FamilyError, is_equal_count_word
from words import Alphabet, FiniteWord, letter_counts

log = logging.getLogger(__name__)

GAMMA = mp.mpf("0.885")
# 1 + 2/gamma, exactly
LAMBDA_THRESHOLD = 1 + 2 / Fraction("0.885")
BOUND_TOLERANCE = mp.mpf("1e-12")
TRACE_SLACK = mp.mpf("1e-9")


class MatrixError(ValueError):
    """Invalid matrix, letter or alphabet input."""


@dataclass(frozen=True)
class Mat2:
    """Row-major 2x2 integer matrix [[a, b], [c, d]]."""

    a: int
    b: int
    c: int
    d: int

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1, 0, 0, 1)

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def transpose(self) -> "Mat2":
        return Mat2(self.a, self.c, self.b, self.d)

    def is_symmetric(self) -> bool:
        return self.b == self.c

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)


@dataclass(frozen=True)
class SpectrumReport:
    """
    Spectral data of an alphabet's letter matrices.

    Attributes:
        letters: The alphabet
        rho_per_letter: rho(B_j) for each letter
        X: Mean of log rho(B_j)
        gamma: The constant 0.885
        threshold: 1 + 2/gamma
    """

    letters: Tuple[int, ...]
    rho_per_letter: Tuple[float, ...]
    X: float
    gamma: float = float(GAMMA)
    threshold: float = float(LAMBDA_THRESHOLD)

    def to_dict(self) -> dict:
        return {
            "alphabet": list(self.letters),
            "rho": list(self.rho_per_letter),
            "X": self.X,
            "gamma": self.gamma,
            "threshold": self.threshold,
        }


def letter_matrix(b: int) -> Mat2:
    """The matrix [[b, 1], [1, 0]] of a letter b >= 1."""
    if int(b) < 1:
        raise MatrixError(f"letters must be >= 1, got {b}")
    return Mat2(int(b), 1, 1, 0)


def word_matrix(word: Union[FiniteWord, Sequence[int]]) -> Mat2:
    """Product of the letter matrices of a word, left to right."""
    product = Mat2.identity()
    for b in word:
        product = product @ letter_matrix(b)
    return product


def spectral_radius(matrix: Mat2):
    """
    Largest absolute eigenvalue (|tr| + sqrt(tr^2 - 4 det)) / 2.

    Returns:
        mpf: The radius at the working mpmath precision

    Raises:
        MatrixError: If the eigenvalues are not real
    """
    tr, det = matrix.trace, matrix.det
    disc = tr * tr - 4 * det
    if disc < 0:
        raise MatrixError(f"complex eigenvalues for {matrix} (tr^2 - 4 det = {disc})")
    return (abs(mp.mpf(tr)) + mp.sqrt(disc)) / 2


def operator_norm(matrix: Mat2) -> float:
    """L2 operator norm, in floating point."""
    return float(np.linalg.norm(matrix.to_array(), 2))


def lemma82_margin(a: int, b: int):
    """
    rho(AB) - (rho(A) rho(B))^gamma for distinct letters a and b.

    Raises:
        MatrixError: If a == b
    """
    if a == b:
        raise MatrixError(f"letters must be distinct, both are {a}")
    A, B = letter_matrix(a), letter_matrix(b)
    return spectral_radius(A @ B) - (spectral_radius(A) * spectral_radius(B)) ** GAMMA


def _check_alphabet(alphabet: Alphabet) -> None:
    k = len(alphabet)
    if k < 3 or k % 2 == 0:
        raise MatrixError(f"alphabet size must be odd and >= 3, got {k}")


def _mean_log_radius(alphabet: Alphabet):
    return mp.fsum(mp.log(spectral_radius(letter_matrix(b))) for b in alphabet) / len(alphabet)


def alphabet_spectrum(alphabet: Alphabet) -> SpectrumReport:
    """
    Radii rho(B_j), their mean logarithm X and the threshold 1 + 2/gamma.

    Raises:
        MatrixError: If the alphabet size is even or below 3
    """
    _check_alphabet(alphabet)
    radii = tuple(float(spectral_radius(letter_matrix(b))) for b in alphabet)
    return SpectrumReport(letters=alphabet.letters, rho_per_letter=radii, X=float(_mean_log_radius(alphabet)))


def _equal_count_word(word: Union[FiniteWord, Sequence[int]], alphabet: Alphabet) -> FiniteWord:
    word = FiniteWord(tuple(word))
    if not is_equal_count_word(word, alphabet):
        raise MatrixError(f"word does not use every letter of {alphabet.letters} equally often")
    return word


def bound_check_upper(word: Union[FiniteWord, Sequence[int]], alphabet: Alphabet) -> Tuple[float, float, bool]:
    """
    Check (1/|V|) log K(V) <= X for an equal-count word V.

    Returns:
        Tuple of (lhs, rhs, pass), pass allowing 1e-12 slack
    """
    word = _equal_count_word(word, alphabet)
    lhs = mp.log(continuant(word)) / len(word)
    rhs = _mean_log_radius(alphabet)
    return float(lhs), float(rhs), bool(lhs <= rhs + BOUND_TOLERANCE)


def bound_check_lower(word: Union[FiniteWord, Sequence[int]], alphabet: Alphabet) -> Tuple[float, float, bool]:
    """
    Check (1/|V|) log K(V) > gamma X - log(4)/|V| for an odd equal-count word V.

    Returns:
        Tuple of (lhs, rhs, pass), pass allowing 1e-12 slack

    Raises:
        MatrixError: If |V| is even or the counts differ
    """
    word = _equal_count_word(word, alphabet)
    if len(word) % 2 == 0:
        raise MatrixError(f"word length must be odd, got {len(word)}")
    lhs = mp.log(continuant(word)) / len(word)
    rhs = GAMMA * _mean_log_radius(alphabet) - mp.log(4) / len(word)
    return float(lhs), float(rhs), bool(lhs > rhs - BOUND_TOLERANCE)


def norm_product_bound(word: Union[FiniteWord, Sequence[int]], alphabet: Alphabet) -> Tuple[int, float, bool]:
    """
    Check K(V) <= prod_j rho(B_j)^{h_j}, h_j the count of letter b_j.

    The comparison is done on logarithms.

    Returns:
        Tuple of (K(V), log of the bound, pass)
    """
    counts = letter_counts(word)
    outside = sorted(set(counts) - set(alphabet.letters))
    if outside:
        raise MatrixError(f"letters {outside} outside alphabet {alphabet.letters}")
    k_value = continuant(word)
    log_bound = mp.fsum(h * mp.log(spectral_radius(letter_matrix(b))) for b, h in counts.items())
    return k_value, float(log_bound), bool(mp.log(k_value) <= log_bound + BOUND_TOLERANCE)


def trace_inequality_check(order: Sequence[int], alphabet: Alphabet) -> Tuple[int, float, bool]:
    """
    Check tr(W) >= rho(B_1 B_k)^l tr(W') for one arrangement W.

    W is the product of the letter matrices in `order`, every letter of the
    alphabet occurring l times and the total length odd; W' drops the
    smallest and largest letters b_1 and b_k.

    Returns:
        Tuple of (tr(W), the right side, pass), pass allowing 1e-9 relative slack
    """
    _check_alphabet(alphabet)
    counts = letter_counts(order)
    if set(counts) != set(alphabet.letters) or len(set(counts.values())) != 1:
        raise MatrixError("every letter must occur equally often in the product")
    if len(order) % 2 == 0:
        raise MatrixError(f"product length must be odd, got {len(order)}")
    ell = counts[alphabet.letters[0]]
    low, high = alphabet.letters[0], alphabet.letters[-1]
    lhs = word_matrix(order).trace
    reduced = word_matrix([b for b in order if b not in (low, high)]).trace
    rhs = spectral_radius(letter_matrix(low) @ letter_matrix(high)) ** ell * reduced
    return lhs, float(rhs), bool(lhs >= rhs * (1 - TRACE_SLACK))


# ==================== CONCATENATED BLOCK FAMILIES ====================


@dataclass(frozen=True)
class BlockGrowthRow:
    """Continuant growth of U_n = W_1 W_2^2 ... W_{n-1}^2 against V_n = W_n."""

    n: int
    len_u: int
    len_v: int
    log_k_u: float
    log_k_v: float
    epsilon: float
    upper_u: float
    measured_u: float
    lower_v: float
    measured_v: float

    @property
    def sandwich_pass(self) -> bool:
        return self.measured_u < self.upper_u and self.measured_v > self.lower_v


@dataclass
class BlockGrowthReport:
    """
    Analysis of a concatenated block family.

    Attributes:
        lam: Growth factor of the family
        threshold_pass: lam > 1 + 2/gamma
        spectrum: Spectral data of the alphabet
        rows: One row per n = 2..n_blocks
    """

    lam: Fraction
    threshold_pass: bool
    spectrum: SpectrumReport
    rows: List[BlockGrowthRow] = field(default_factory=list)

    @property
    def all_epsilon_positive(self) -> bool:
        return all(row.epsilon > 0 for row in self.rows)

    def to_dict(self) -> dict:
        return {
            "lam": {"num": self.lam.numerator, "den": self.lam.denominator},
            "threshold_pass": self.threshold_pass,
            "spectrum": self.spectrum.to_dict(),
            "rows": [
                {
                    "n": row.n,
                    "len_u": row.len_u,
                    "len_v": row.len_v,
                    "epsilon": row.epsilon,
                    "upper_u": row.upper_u,
                    "measured_u": row.measured_u,
                    "lower_v": row.lower_v,
                    "measured_v": row.measured_v,
                    "sandwich_pass": row.sandwich_pass,
                }
                for row in self.rows
            ],
        }


def theorem81_analyze(family: ConcatFamily, n_blocks: int) -> BlockGrowthReport:
    """
    Compare log K(W_n) with log K(W_1 W_2^2 ... W_{n-1}^2) on a block family.

    For n = 2..n_blocks the continuants are exact. Each row reports
    epsilon_n = log K(V_n)/log K(U_n) - 1 together with the two per-letter
    bounds that force epsilon_n > 0 once lam > 1 + 2/gamma:
    log K(U_n)/|V_n| < 2X/(lam - 1) + 2n/|V_n| and
    log K(V_n)/|V_n| > gamma X - log(4)/|V_n|.

    Args:
        family: The block family
        n_blocks: Number of blocks analysed, at least 3

    Returns:
        BlockGrowthReport: Rows and the threshold comparison
    """
    if n_blocks < 3:
        raise MatrixError(f"n_blocks must be >= 3, got {n_blocks}")
    blocks = list(itertools.islice(family.iter_blocks(), n_blocks))
    if len(blocks) < n_blocks:
        raise FamilyError(f"family supplies only {len(blocks)} blocks, {n_blocks} requested")

    spectrum = alphabet_spectrum(family.alphabet)
    X = _mean_log_radius(family.alphabet)
    lam = family.lam
    report = BlockGrowthReport(lam=lam, threshold_pass=lam > LAMBDA_THRESHOLD, spectrum=spectrum)
    if not report.threshold_pass:
        log.warning("lambda=%s does not exceed 1 + 2/gamma = %.6f", lam, float(LAMBDA_THRESHOLD))

    u_letters: List[int] = list(blocks[0].letters)
    for n in range(2, n_blocks + 1):
        v = blocks[n - 1]
        log_k_u = mp.log(continuant(u_letters))
        log_k_v = mp.log(continuant(v))
        len_v = len(v)
        row = BlockGrowthRow(
            n=n,
            len_u=len(u_letters),
            len_v=len_v,
            log_k_u=float(log_k_u),
            log_k_v=float(log_k_v),
            epsilon=float(log_k_v / log_k_u - 1),
            upper_u=float(2 * X / (mp.mpf(lam.numerator) / lam.denominator - 1) + mp.mpf(2 * n) / len_v),
            measured_u=float(log_k_u / len_v),
            lower_v=float(GAMMA * X - mp.log(4) / len_v),
            measured_v=float(log_k_v / len_v),
        )
        report.rows.append(row)
        log.debug("block %d: |U|=%d |V|=%d epsilon=%.6f", n, row.len_u, len_v, row.epsilon)
        u_letters.extend(v.letters * 2)
    return report


def lemma82_sweep(max_letter: int) -> Dict[str, object]:
    """Evaluate the radius margin for every pair 1 <= a < b <= max_letter."""
    worst = None
    checked = 0
    for a in range(1, max_letter + 1):
        for b in range(a + 1, max_letter + 1):
            margin = lemma82_margin(a, b)
            checked += 1
            if worst is None or margin < worst[0]:
                worst = (margin, a, b)
    return {
        "checked": checked,
        "passed": worst is None or worst[0] > 0,
        "worst": None if worst is None else {"margin": float(worst[0]), "a": worst[1], "b": worst[2]},
    }
