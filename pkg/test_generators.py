#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests for the sequence families, the floor identities and the family registry.
"""

import itertools
import math
from fractions import Fraction

import pytest

from cf_core import CFExpansion, parse_theta
from generators import (
    FAMILIES,
    ConcatFamily,
    DavisonParams,
    FamilyError,
    FoldingSystem,
    PerturbedSymmetry,
    PerturbedSystem,
    baum_sweet_stream,
    build_family,
    concat_family_stream,
    davison_stream,
    davison_witnesses,
    floor_n_theta,
    has_odd_zero_block,
    is_equal_count_word,
    morphic_baum_sweet_stream,
    morphic_rudin_shapiro_stream,
    nested_fold,
    paperfolding_stream,
    parse_signs,
    parse_symmetries,
    perturbed_symmetry_stream,
    random_equal_blocks,
    rudin_shapiro_bit,
    rudin_shapiro_stream,
    verify_floor_identities,
)
from words import Alphabet, FiniteWord


def test_floor_n_theta_golden():
    theta = parse_theta("golden")
    assert [floor_n_theta(theta, n) for n in (1, 2, 5)] == [0, 1, 3]
    assert [floor_n_theta(theta, n) for n in range(1, 9)] == [0, 1, 1, 2, 3, 3, 4, 4]
    assert floor_n_theta(theta, 0) == 0


def test_floor_n_theta_large_n_against_integer_sqrt():
    """floor(n (sqrt(5) - 1)/2) = (isqrt(5 n^2) - n) // 2."""
    theta = parse_theta("golden")
    for n in (10, 999, 12345, 10**6 + 7, 10**12 + 39):
        assert floor_n_theta(theta, n) == (math.isqrt(5 * n * n) - n) // 2


def test_floor_n_theta_rational_theta_runs_out():
    with pytest.raises(ValueError):
        floor_n_theta(CFExpansion.from_word([2]), 2)


def test_davison_stream_examples():
    theta = parse_theta("golden")
    assert davison_stream(DavisonParams(theta, 2)).take(8).letters == (1, 2, 2, 1, 2, 2, 1, 1)
    assert davison_stream(DavisonParams(parse_theta("golden"), 3)).take(5).letters == (1, 2, 2, 3, 1)
    with pytest.raises(FamilyError):
        DavisonParams(theta, 1)


def test_davison_letters_in_range_and_not_constant():
    for descriptor in ("golden", "silver", "[0;1,(2)]"):
        prefix = davison_stream(DavisonParams(parse_theta(descriptor), 3)).take(3000).letters
        assert set(prefix) <= {1, 2, 3}
        for start in range(0, 2000, 250):
            assert len(set(prefix[start:start + 1000])) >= 2


def test_davison_witnesses_hold_in_the_stream():
    """Every constructed repetition is a real offset-zero repetition of the prefix."""
    for descriptor, k in (("golden", 2), ("silver", 2), ("[0;1,(2)]", 3), ("golden", 3)):
        params = DavisonParams(parse_theta(descriptor), k)
        witnesses = davison_witnesses(params, 1, 9)
        longest = max(w.period + w.extension for w in witnesses)
        prefix = davison_stream(DavisonParams(parse_theta(descriptor), k)).take(longest).letters
        for w in witnesses:
            assert all(prefix[i] == prefix[i + w.period] for i in range(w.extension)), (descriptor, k, w)
            assert w.exponent >= 1 + Fraction(1, k**k)
            if w.case == "large-quotient":
                assert w.exponent >= 1 + Fraction(1, k)


def test_davison_silver_k2_uses_large_quotients():
    witnesses = davison_witnesses(DavisonParams(parse_theta("silver"), 2), 1, 5)
    assert all(w.case == "large-quotient" for w in witnesses)


def test_floor_identities_hold():
    for descriptor, n_max, cap in (("golden", 10, 100_000), ("silver", 8, 10_000), ("[0;1,(2)]", 8, 10_000)):
        report = verify_floor_identities(parse_theta(descriptor), n_max, cap)
        assert report.passed, report.first_failure
        assert set(report.checked) == {"shift", "multiple_shift", "sum_shift"}
        assert all(0 < count <= cap for count in report.checked.values())
        assert report.total == sum(report.checked.values())


def test_floor_identities_cap_and_range():
    report = verify_floor_identities(parse_theta("golden"), 12, 50)
    assert report.checked == {"shift": 50, "multiple_shift": 50, "sum_shift": 50}
    with pytest.raises(ValueError):
        verify_floor_identities(parse_theta("golden"), 0, 10)


def test_rudin_shapiro_examples():
    assert rudin_shapiro_stream(1, 2).take(8).letters == (1, 1, 1, 2, 1, 1, 2, 1)
    assert rudin_shapiro_bit(3) == 1
    assert rudin_shapiro_bit(7) == 0


def test_baum_sweet_examples():
    assert baum_sweet_stream(1, 2).take(6).letters == (2, 2, 1, 2, 2, 1)
    assert not has_odd_zero_block(4)
    assert has_odd_zero_block(2)
    assert not has_odd_zero_block(0)
    assert morphic_baum_sweet_stream(1, 2).take(12).letters == (2, 2, 1, 2, 2, 1, 1, 2, 1, 2, 1, 1)


def test_morphic_streams_match_direct_definitions():
    count = 20_000
    assert morphic_baum_sweet_stream(1, 2).take(count) == baum_sweet_stream(1, 2).take(count)
    assert morphic_rudin_shapiro_stream(3, 5).take(count) == rudin_shapiro_stream(3, 5).take(count)


def test_automatic_streams_reject_equal_letters():
    with pytest.raises(FamilyError):
        rudin_shapiro_stream(2, 2)
    with pytest.raises(FamilyError):
        baum_sweet_stream(0, 1)


def test_paperfolding_examples():
    assert paperfolding_stream(FoldingSystem(1, 2)).take(7).letters == (1, 1, 2, 1, 1, 2, 2)
    assert paperfolding_stream(FoldingSystem(1, 2, pattern=(1, -1))).take(3).letters == (1, 2, 2)
    assert paperfolding_stream(FoldingSystem(5, 3, pattern=(-1,))).take(1).letters == (3,)


def test_paperfolding_matches_nested_folds():
    """Iterates have length 2^(n+1) - 1 and each is a prefix of the next."""
    system = FoldingSystem(1, 2, seed=17)
    instructions = list(itertools.islice(system.instructions(), 10))
    prefix = paperfolding_stream(system).take(2**10 - 1).letters
    for n in range(1, 11):
        folded = nested_fold(instructions[:n])
        assert len(folded) == 2**n - 1
        assert tuple(1 if e == 1 else 2 for e in folded) == prefix[: len(folded)]


def test_parse_signs():
    assert parse_signs("+-+") == (1, -1, 1)
    assert parse_signs("1,-1") == (1, -1)
    with pytest.raises(ValueError):
        parse_signs("1,2")


def test_perturbed_mirror_symmetry():
    symmetry = PerturbedSymmetry((FiniteWord((3,)),), ("R",))
    system = PerturbedSystem(Alphabet((1, 2, 3)), FiniteWord((1, 2)), (symmetry,))
    assert perturbed_symmetry_stream(system).take(5).letters == (1, 2, 3, 2, 1)


def test_perturbed_identity_symmetry_is_periodic():
    symmetry = PerturbedSymmetry((FiniteWord(()),), ("E",))
    system = PerturbedSystem(Alphabet((1, 2)), FiniteWord((1, 2)), (symmetry,))
    assert perturbed_symmetry_stream(system).take(16).letters == (1, 2) * 8


def test_perturbed_lengths_and_prefixes():
    symmetries = parse_symmetries("3,1:R/2:E;1:E")
    assert [s.k for s in symmetries] == [2, 1]
    system = PerturbedSystem(Alphabet((1, 2, 3)), FiniteWord((2, 1)), symmetries, schedule=(0, 1))
    word = system.seed
    lengths = [len(word)]
    for index in (0, 1, 0):
        symmetry = symmetries[index]
        nxt = symmetry.apply(word)
        assert nxt[: len(word)] == word
        assert len(nxt) == (symmetry.k + 1) * len(word) + sum(len(x) for x in symmetry.inserts)
        word = nxt
        lengths.append(len(word))
    assert perturbed_symmetry_stream(system).take(len(word)) == word


def test_perturbed_validation():
    with pytest.raises(FamilyError):
        PerturbedSymmetry((FiniteWord((1,)),), ("X",))
    with pytest.raises(FamilyError):
        PerturbedSymmetry((), ())
    symmetry = PerturbedSymmetry((FiniteWord((3,)),), ("R",))
    with pytest.raises(FamilyError):
        PerturbedSystem(Alphabet((1, 2)), FiniteWord((1, 2)), (symmetry,))
    with pytest.raises(FamilyError):
        PerturbedSystem(Alphabet((1, 2, 3)), FiniteWord((1, 2)), (symmetry,), schedule=(1,))
    with pytest.raises(FamilyError):
        parse_symmetries("3R")


def test_concat_family_stream():
    w1 = FiniteWord((1, 2, 3))
    w2 = FiniteWord((1, 1, 2, 3, 2, 3, 1, 2, 3, 2, 1, 3, 1, 2, 3))
    family = ConcatFamily(Alphabet((1, 2, 3)), (w1, w2), Fraction("3.26"))
    stream = concat_family_stream(family)
    assert stream.take(33) == w1 + w2 + w2


def test_concat_family_violations():
    alphabet = Alphabet((1, 2, 3))
    unequal = ConcatFamily(alphabet, (FiniteWord((1, 2, 3)), FiniteWord((1, 1, 2))), 2)
    stream = concat_family_stream(unequal)
    assert stream.take(3).letters == (1, 2, 3)
    with pytest.raises(FamilyError):
        stream.take(1)
    slow = ConcatFamily(alphabet, (FiniteWord((1, 2, 3)), FiniteWord((1, 2, 3) * 3)), Fraction("3.3"))
    with pytest.raises(FamilyError):
        concat_family_stream(slow).take(10)
    with pytest.raises(FamilyError):
        ConcatFamily(Alphabet((1, 2)), (), 4)
    with pytest.raises(FamilyError):
        ConcatFamily(alphabet, (), 1)


def test_random_equal_blocks():
    alphabet = Alphabet((1, 2, 3))
    factory = random_equal_blocks(alphabet, 4, seed=3)
    blocks = list(itertools.islice(factory(), 4))
    assert [len(b) for b in blocks] == [3, 15, 63, 255]
    assert all(is_equal_count_word(b, alphabet) for b in blocks)
    again = list(itertools.islice(factory(), 4))
    assert again == blocks


def test_registry_builds_every_family():
    for name, spec in FAMILIES.items():
        stream, built = build_family(name)
        assert built is spec
        prefix = stream.take(200)
        assert all(a >= 1 for a in prefix)
        min_w, max_wprime = spec.analysis_defaults()
        assert min_w > 1 and max_wprime >= 0
    assert FAMILIES["baum-sweet"].growth_converges
    assert not FAMILIES["rudin-shapiro"].growth_converges


def test_registry_parameters():
    stream, _ = build_family("davison", {"theta": "golden", "k": "2"})
    assert stream.take(8).letters == (1, 2, 2, 1, 2, 2, 1, 1)
    stream, _ = build_family("paperfolding", {"pattern": "+-"})
    assert stream.take(3).letters == (1, 2, 2)
    assert FAMILIES["davison"].analysis_defaults({"k": "3"}) == (Fraction(28, 27), 0)
    assert FAMILIES["concat"].analysis_defaults({"lam": "5"}) == (2, Fraction(1, 2))
    assert FAMILIES["perturbed"].analysis_defaults({"symmetries": "3:R/1:E"}) == (Fraction(7, 6), 0)
    with pytest.raises(FamilyError):
        build_family("thue-morse")
    with pytest.raises(FamilyError):
        build_family("davison", {"k": "two"})
