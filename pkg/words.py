"""
Finite words, word streams and morphisms.

Letters are positive integers so that any word can be read directly as a list
of continued-fraction partial quotients. Symbolic alphabets (a, b, ...) only
exist at the text I/O boundary, where an `#alphabet 1=a 2=b` header maps them
to integers.

Features:
- Fractional powers W^x, mirror images and sign negation
- Morphisms, their iteration and prolongable fixed points
- Lazy letter-to-letter codings of infinite streams
- Word text format parsing and formatting
"""

from __future__ import annotations

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from utils import to_fraction

log = logging.getLogger(__name__)

Letter = int

ALIAS_HEADER = "#alphabet"


class WordError(ValueError):
    """Raised for malformed words, alphabets or morphisms."""


@dataclass(frozen=True)
class Alphabet:
    """
    Ordered set of letters, each a positive integer.

    Attributes:
        letters: Strictly increasing positive integers
    """

    letters: Tuple[Letter, ...]

    def __post_init__(self) -> None:
        letters = tuple(int(b) for b in self.letters)
        object.__setattr__(self, "letters", letters)
        if not letters:
            raise WordError("alphabet must be non-empty")
        if letters[0] < 1:
            raise WordError(f"letters must be positive integers, got {letters[0]}")
        for prev, cur in zip(letters, letters[1:]):
            if cur <= prev:
                raise WordError(f"alphabet letters must be strictly increasing: {letters}")

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __contains__(self, letter: object) -> bool:
        return letter in self.letters


@dataclass(frozen=True)
class FiniteWord:
    """
    Immutable finite word over positive integers.

    Attributes:
        letters: The letters, in order
        alphabet: Optional alphabet every letter must belong to
    """

    letters: Tuple[Letter, ...] = ()
    alphabet: Optional[Alphabet] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        letters = tuple(int(a) for a in self.letters)
        object.__setattr__(self, "letters", letters)
        for a in letters:
            if a < 1:
                raise WordError(f"letters must be positive integers, got {a}")
        if self.alphabet is not None:
            for a in letters:
                if a not in self.alphabet:
                    raise WordError(f"letter {a} not in alphabet {self.alphabet.letters}")

    @property
    def length(self) -> int:
        return len(self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return FiniteWord(self.letters[index])
        return self.letters[index]

    def __add__(self, other: Union["FiniteWord", Sequence[Letter]]) -> "FiniteWord":
        return FiniteWord(self.letters + tuple(other))

    def __mul__(self, times: int) -> "FiniteWord":
        return FiniteWord(self.letters * times)

    def __repr__(self) -> str:
        if len(self.letters) > 24:
            head = ",".join(map(str, self.letters[:24]))
            return f"FiniteWord([{head},...] len={len(self.letters)})"
        return f"FiniteWord({list(self.letters)})"


def as_word(word: Union[FiniteWord, Iterable[Letter]]) -> FiniteWord:
    """Coerce a letter sequence to a FiniteWord."""
    return word if isinstance(word, FiniteWord) else FiniteWord(tuple(word))


class WordStream:
    """
    Pull-based infinite word.

    A stream is single-consumer: every letter is yielded exactly once and
    `position` counts how many letters have been pulled so far.
    """

    def __init__(self, source: Iterable[Letter], name: str = "stream"):
        self._source = iter(source)
        self.name = name
        self.position = 0

    def __iter__(self) -> "WordStream":
        return self

    def __next__(self) -> Letter:
        letter = next(self._source)
        self.position += 1
        return letter

    def next(self) -> Letter:
        return self.__next__()

    def take(self, count: int) -> FiniteWord:
        """
        Pull the next `count` letters.

        Raises:
            WordError: If the stream ends first
        """
        letters = []
        for _ in range(count):
            try:
                letters.append(next(self))
            except StopIteration:
                raise WordError(
                    f"{self.name} ended after {self.position} letters, {count} requested"
                ) from None
        return FiniteWord(tuple(letters))


@dataclass(frozen=True)
class SignedWord:
    """
    Word over {+1, -1}.

    Attributes:
        signs: Sequence of +1 / -1 entries
    """

    signs: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        signs = tuple(int(e) for e in self.signs)
        object.__setattr__(self, "signs", signs)
        for e in signs:
            if e not in (1, -1):
                raise WordError(f"signed words hold only +1/-1, got {e}")

    def __len__(self) -> int:
        return len(self.signs)

    def __iter__(self) -> Iterator[int]:
        return iter(self.signs)

    def __add__(self, other: "SignedWord") -> "SignedWord":
        return SignedWord(self.signs + tuple(other))


@dataclass(frozen=True)
class Morphism:
    """
    Non-erasing morphism of free monoids over positive-integer letters.

    Attributes:
        domain: Letters the morphism is defined on
        images: Image word of every domain letter
        uniform_length: Common image length, when every image has it
    """

    domain: Alphabet
    images: Mapping[Letter, Tuple[Letter, ...]]
    uniform_length: Optional[int] = None

    def __post_init__(self) -> None:
        images = {int(a): tuple(int(b) for b in img) for a, img in self.images.items()}
        object.__setattr__(self, "images", images)
        if set(images) != set(self.domain.letters):
            raise WordError("morphism must give exactly one image per domain letter")
        for a, img in images.items():
            if not img:
                raise WordError(f"erasing image for letter {a}")
        if self.uniform_length is not None:
            if self.uniform_length < 1:
                raise WordError("uniform_length must be positive")
            for a, img in images.items():
                if len(img) != self.uniform_length:
                    raise WordError(
                        f"image of {a} has length {len(img)}, expected {self.uniform_length}"
                    )

    @classmethod
    def from_images(cls, images: Mapping[Letter, Iterable[Letter]]) -> "Morphism":
        """Build a morphism, inferring its domain and uniform length."""
        frozen = {int(a): tuple(img) for a, img in images.items()}
        lengths = {len(img) for img in frozen.values()}
        uniform = lengths.pop() if len(lengths) == 1 else None
        return cls(Alphabet(tuple(sorted(frozen))), frozen, uniform)

    def image(self, letter: Letter) -> Tuple[Letter, ...]:
        try:
            return self.images[letter]
        except KeyError:
            raise WordError(f"letter {letter} outside morphism domain {self.domain.letters}") from None


def frac_power(word: Union[FiniteWord, Sequence[Letter]], x: Union[Fraction, int, str]) -> FiniteWord:
    """
    Fractional power W^x: W repeated floor(x) times, then the prefix of W of
    length ceil((x - floor(x))|W|).

    Args:
        word: Non-empty base word
        x: Positive rational exponent

    Returns:
        FiniteWord: W^x

    Raises:
        WordError: If W is empty or x is not positive
    """
    word = as_word(word)
    x = to_fraction(x)
    if not word.letters:
        raise WordError("fractional power of the empty word")
    if x <= 0:
        raise WordError(f"exponent must be positive, got {x}")
    whole = math.floor(x)
    extra = math.ceil((x - whole) * len(word))
    return FiniteWord(word.letters * whole + word.letters[:extra])


def mirror(word: Union[FiniteWord, Sequence[Letter]]) -> FiniteWord:
    """Mirror image w_m ... w_1 of w_1 ... w_m."""
    return FiniteWord(tuple(reversed(tuple(word))))


def negate(signed: Union[SignedWord, Sequence[int]]) -> SignedWord:
    """Flip every sign of a signed word."""
    return SignedWord(tuple(-e for e in signed))


def fold_map(sign: int, signed: Union[SignedWord, Sequence[int]]) -> SignedWord:
    """
    Folding map F_i: w -> w i -(mirror w).

    Args:
        sign: The fold instruction i, +1 or -1
        signed: The word w

    Returns:
        SignedWord: F_i(w)
    """
    w = signed if isinstance(signed, SignedWord) else SignedWord(tuple(signed))
    return SignedWord(w.signs + (sign,) + tuple(-e for e in reversed(w.signs)))


def morphism_apply(sigma: Morphism, word: Union[FiniteWord, Sequence[Letter]]) -> FiniteWord:
    """
    Apply a morphism letter by letter and concatenate the images.

    Raises:
        WordError: If a letter lies outside the morphism's domain
    """
    out: List[Letter] = []
    for letter in word:
        out.extend(sigma.image(letter))
    return FiniteWord(tuple(out))


def morphism_power(sigma: Morphism, word: Union[FiniteWord, Sequence[Letter]], n: int) -> FiniteWord:
    """Apply `sigma` n times."""
    word = as_word(word)
    for _ in range(n):
        word = morphism_apply(sigma, word)
    return word


def fixed_point_stream(sigma: Morphism, seed: Letter) -> WordStream:
    """
    Stream the fixed point of `sigma` starting with `seed`.

    Images are expanded one letter at a time: the buffer always holds
    sigma(u[0:expanded]), which is a prefix of the fixed point u.

    Raises:
        WordError: If sigma is not prolongable at seed
    """
    start = sigma.image(seed)
    if start[0] != seed or len(start) < 2:
        raise WordError(f"morphism is not prolongable at letter {seed}: image {list(start)}")

    def expand() -> Iterator[Letter]:
        buffer = list(start)
        expanded = 1
        position = 0
        while True:
            while position >= len(buffer):
                buffer.extend(sigma.image(buffer[expanded]))
                expanded += 1
            yield buffer[position]
            position += 1

    return WordStream(expand(), name=f"fixed point at {seed}")


def coding_apply(phi: Morphism, stream: Iterable[Letter]) -> WordStream:
    """
    Lazily relabel a stream letter by letter with a 1-uniform morphism.

    Raises:
        WordError: If phi is not 1-uniform; letters outside its domain raise
            when they are pulled
    """
    if any(len(img) != 1 for img in phi.images.values()):
        raise WordError("a coding must map every letter to a single letter")
    table = {a: img[0] for a, img in phi.images.items()}

    def relabel() -> Iterator[Letter]:
        for letter in stream:
            try:
                yield table[letter]
            except KeyError:
                raise WordError(f"letter {letter} outside coding domain") from None

    return WordStream(relabel(), name="coded stream")


def letter_counts(word: Union[FiniteWord, Sequence[Letter]]) -> Dict[Letter, int]:
    """Number of occurrences of every letter."""
    return dict(Counter(word))


# ==================== WORD TEXT FORMAT ====================

_ALIAS_RE = re.compile(r"^(\d+)=(\S+)$")


def parse_word_text(text: str) -> Tuple[List[FiniteWord], Dict[str, Letter]]:
    """
    Parse the word text format.

    One word per line, letters separated by whitespace. An optional first
    line `#alphabet 1=a 2=b` declares symbolic aliases; aliased symbols and
    plain integers may then both appear. Blank lines are skipped.

    Returns:
        Tuple of the words and the symbol -> letter alias map

    Raises:
        WordError: On unknown symbols, non-positive letters or a bad header
    """
    aliases: Dict[str, Letter] = {}
    words: List[FiniteWord] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(ALIAS_HEADER):
            if words:
                raise WordError(f"line {lineno}: alphabet header must precede the words")
            for item in line[len(ALIAS_HEADER):].split():
                match = _ALIAS_RE.match(item)
                if not match:
                    raise WordError(f"line {lineno}: bad alias {item!r}")
                aliases[match.group(2)] = int(match.group(1))
            continue
        if line.startswith("#"):
            continue
        letters = []
        for token in line.split():
            if token in aliases:
                letters.append(aliases[token])
            elif token.isascii() and token.isdigit() and int(token) >= 1:
                letters.append(int(token))
            else:
                raise WordError(f"line {lineno}: bad letter {token!r}")
        words.append(FiniteWord(tuple(letters)))
    return words, aliases


def format_word(word: Union[FiniteWord, Iterable[Letter]], aliases: Optional[Mapping[str, Letter]] = None) -> str:
    """Render a word as one line of the word text format."""
    names: Dict[Letter, str] = {v: k for k, v in (aliases or {}).items()}
    return " ".join(names.get(a, str(a)) for a in word)


def format_alias_header(aliases: Mapping[str, Letter]) -> str:
    """Render the `#alphabet` header for an alias map."""
    items = sorted(aliases.items(), key=lambda kv: kv[1])
    return ALIAS_HEADER + " " + " ".join(f"{letter}={name}" for name, letter in items)


def stream_from_word(word: Union[FiniteWord, Iterable[Letter]], name: str = "word") -> WordStream:
    """Wrap a finite word as a (finite) stream, e.g. a word read from a file."""
    return WordStream(iter(tuple(word)), name=name)