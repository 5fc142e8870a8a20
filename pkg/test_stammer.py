#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests for repetition detection, the stammering conditions and the verdict rules.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from cf_core import GrowthEstimate, growth_estimate_from_word, parse_theta
from generators import (
    ConcatFamily,
    DavisonParams,
    FoldingSystem,
    PerturbedSymmetry,
    PerturbedSystem,
    baum_sweet_stream,
    concat_family_stream,
    davison_stream,
    paperfolding_stream,
    perturbed_symmetry_stream,
    random_equal_blocks,
    rudin_shapiro_stream,
)
from stammer import (
    ConditionReport,
    DetectorError,
    GrowthError,
    RepetitionWitness,
    condition_star,
    condition_star_star,
    criterion_verdict,
    detect_repetitions,
    format_witnesses,
    periodicity_scan,
    prefix_continuants,
    reference_repetitions,
    rhs_theorem31,
    rhs_theorem_b,
    verify_witness,
    witness_continuant_check,
    z_function,
)
from words import Alphabet, FiniteWord


def _growth(M_hat, m_hat):
    return GrowthEstimate(M_hat, m_hat, 10, 20, (), math.log(M_hat), math.log(m_hat))


def test_z_function():
    assert z_function([1, 1, 2, 1, 1, 2]) == [6, 1, 0, 3, 1, 0]
    assert z_function([]) == []


def test_detect_square():
    witnesses = detect_repetitions([1, 1, 2, 1, 1, 2], 0, Fraction(9, 8))
    assert RepetitionWitness(0, 3, Fraction(2)) in witnesses
    assert [w.s for w in witnesses] == sorted(w.s for w in witnesses)


def test_detect_rudin_shapiro_first_letters():
    prefix = rudin_shapiro_stream(1, 2).take(9)
    assert prefix.letters == (1, 1, 1, 2, 1, 1, 2, 1, 1)
    assert RepetitionWitness(0, 8, Fraction(9, 8)) in detect_repetitions(prefix, 0, Fraction(9, 8))


def test_detect_baum_sweet_first_letters():
    prefix = baum_sweet_stream(1, 2).take(10)
    assert prefix.letters == (2, 2, 1, 2, 2, 1, 1, 2, 1, 2)
    witnesses = detect_repetitions(prefix, 1, Fraction(3, 2))
    assert RepetitionWitness(1, 6, Fraction(3, 2)) in witnesses
    assert RepetitionWitness(1, 6, Fraction(3, 2)).extension == 3
    assert RepetitionWitness(1, 6, Fraction(3, 2)).end == 10


def test_fast_detector_matches_reference_scan():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        size = int(rng.integers(10, 201))
        letters = [int(a) for a in rng.integers(1, 3 if rng.random() < 0.7 else 4, size=size)]
        max_r = int(rng.integers(0, min(12, size)))
        min_w = [Fraction(9, 8), Fraction(5, 4), Fraction(3, 2), Fraction(2)][int(rng.integers(0, 4))]
        assert detect_repetitions(letters, max_r, min_w) == reference_repetitions(letters, max_r, min_w)


def test_detected_witnesses_are_sound():
    rng = np.random.default_rng(4)
    for _ in range(50):
        letters = [int(a) for a in rng.integers(1, 6, size=80)]
        qs = prefix_continuants(letters)
        for witness in detect_repetitions(letters, 8, Fraction(5, 4)):
            assert witness.w >= Fraction(5, 4)
            assert (witness.w * witness.s).denominator == 1
            assert verify_witness(letters, witness)
            lhs, rhs, ok = witness_continuant_check(letters, witness, qs)
            assert ok
            assert (lhs, rhs, ok) == witness_continuant_check(letters, witness)


def test_verify_witness_rejects_non_maximal_exponent():
    assert verify_witness([1, 1, 2, 1, 1, 2], RepetitionWitness(0, 3, Fraction(2)))
    assert not verify_witness([1, 1, 2, 1, 1, 2], RepetitionWitness(0, 3, Fraction(4, 3)))
    assert not verify_witness([1, 2, 3], RepetitionWitness(0, 2, Fraction(3, 2)))


def test_prefix_continuants():
    assert prefix_continuants([1, 1, 1, 1]) == [1, 1, 2, 3, 5]
    assert prefix_continuants([1, 2, 3])[-1] == 10


def test_detector_errors():
    with pytest.raises(DetectorError):
        detect_repetitions([], 0, 2)
    with pytest.raises(DetectorError):
        detect_repetitions([1, 2], 2, 2)
    with pytest.raises(DetectorError):
        detect_repetitions([1, 2, 1], 0, 1)


def test_condition_star_rudin_shapiro():
    """Powers of two are periods of long prefixes of the Rudin-Shapiro word."""
    prefix_len = 2**16
    report = condition_star(rudin_shapiro_stream(1, 2), prefix_len, T=5, min_w=Fraction(9, 8))
    assert report.star_w is not None and report.star_w >= Fraction(9, 8)
    assert len(report.star_witnesses) == 5
    by_period = {w.s: w for w in report.witnesses}
    for m in range(3, 16):
        s = 2**m
        assert s in by_period and by_period[s].w >= Fraction(9, 8)
    verdict = criterion_verdict(report, _growth(1.8, 1.6))
    assert verdict.rule in ("TheoremA_bounded", "TheoremA_w2")
    assert verdict.margin > 0


def test_condition_star_star_baum_sweet():
    stream = baum_sweet_stream(1, 2)
    report = condition_star_star(stream, 6 * 4**6, T=4, min_w=Fraction(5, 4), max_wprime=Fraction(1, 6))
    assert report.starstar == (Fraction(3, 2), Fraction(1, 6))
    assert len(report.starstar_witnesses) == 4
    assert all(w.ratio <= Fraction(1, 6) and w.w >= Fraction(3, 2) for w in report.starstar_witnesses)
    assert report.star_w is None

    verdict = criterion_verdict(report, _growth(1.5, 1.5), assume_convergent=True)
    assert verdict.rule == "Theorem31"
    assert verdict.margin == pytest.approx(1 / 3, abs=1e-6)
    assert verdict.assumed_convergent


def test_condition_star_star_reduces_to_offset_zero():
    letters = [1, 1, 2, 1, 1, 2, 1, 1, 2, 1, 1, 2, 3]
    star_star = condition_star_star(letters, len(letters), T=3, min_w=Fraction(9, 8), max_wprime=0)
    star = condition_star(letters, len(letters), T=3, min_w=Fraction(9, 8))
    assert star_star.star_w == star.star_w
    assert star_star.starstar == (star.star_w, 0)


def test_selection_picks_deepest_or_strongest_witnesses():
    letters = [1, 1, 2] * 4 + [3]
    deepest = condition_star(letters, len(letters), T=3)
    assert [(w.s, w.w) for w in deepest.witnesses] == [
        (1, 2), (3, 4), (4, Fraction(5, 4)), (6, 2), (7, Fraction(8, 7)), (9, Fraction(4, 3))
    ]
    assert [w.s for w in deepest.star_witnesses] == [6, 7, 9]
    assert deepest.star_w == Fraction(8, 7)

    strongest = condition_star(letters, len(letters), T=3, selection="strongest")
    assert [w.s for w in strongest.star_witnesses] == [1, 3, 6]
    assert strongest.star_w == 2
    assert strongest.to_dict()["selection"] == "strongest"
    assert criterion_verdict(strongest, _growth(1.8, 1.6)).rule == "TheoremA_w2"

    star_star = condition_star_star(letters, len(letters), T=3, min_w=Fraction(9, 8), max_wprime=0, selection="strongest")
    assert star_star.starstar == (2, 0)
    with pytest.raises(DetectorError):
        condition_star(letters, len(letters), T=3, selection="widest")


def test_davison_golden_offset_zero_stammering():
    prefix_len = 10**5
    prefix = davison_stream(DavisonParams(parse_theta("golden"), 2)).take(prefix_len)
    report = condition_star(prefix, prefix_len, T=8, min_w=Fraction(5, 4))
    assert len(report.witnesses) >= 8
    assert all(w.r == 0 and w.w >= Fraction(5, 4) for w in report.witnesses)
    assert report.star_w is not None and report.star_w >= Fraction(5, 4)
    assert all(verify_witness(prefix, w) for w in report.star_witnesses)
    assert periodicity_scan(prefix, 10**4, 1000, 1000) is None

    verdict = criterion_verdict(report, growth_estimate_from_word(prefix))
    assert verdict.rule == "TheoremA_bounded"
    assert verdict.margin > 0


def test_paperfolding_streams_stammer_with_five_quarter_powers():
    prefix_len = 2**14
    systems = [FoldingSystem()] + [FoldingSystem(seed=seed) for seed in range(50)]
    for system in systems:
        prefix = paperfolding_stream(system).take(prefix_len)
        report = condition_star(prefix, prefix_len, T=5, min_w=Fraction(5, 4))
        assert report.star_w is not None and report.star_w >= Fraction(5, 4), system
        assert periodicity_scan(prefix, prefix_len, 512, 512) is None, system


def test_palindromic_insert_gives_periodic_word():
    symmetry = PerturbedSymmetry((FiniteWord((3, 1, 3)),), ("R",))
    system = PerturbedSystem(Alphabet((1, 2, 3)), FiniteWord((1, 2)), (symmetry,))
    prefix = perturbed_symmetry_stream(system).take(10**4)
    assert periodicity_scan(prefix, 10**4, 100, 100) == (0, 10)


def test_random_perturbed_systems_stammer():
    """Every symmetry has two inserts, so w >= 1 + 1/6 at every deep enough scale."""
    threshold = min(Fraction(3, 2), 1 + Fraction(1, 3 * 2))
    rng = np.random.default_rng(23)
    prefix_len = 3 * 10**4
    for trial in range(20):
        first_mode = "E" if rng.random() < 0.5 else "R"
        symmetries = []
        for _ in range(int(rng.integers(1, 3))):
            a, b = (int(x) for x in rng.choice([1, 2, 3], size=2, replace=False))
            second = FiniteWord(tuple(int(x) for x in rng.integers(1, 4, size=int(rng.integers(0, 3)))))
            modes = (first_mode, "E" if rng.random() < 0.5 else "R")
            symmetries.append(PerturbedSymmetry((FiniteWord((a, b)), second), modes))
        seed_word = FiniteWord(tuple(int(x) for x in rng.integers(1, 4, size=3)))
        system = PerturbedSystem(
            Alphabet((1, 2, 3)), seed_word, tuple(symmetries), schedule=tuple(range(len(symmetries))), rng_seed=trial
        )
        prefix = perturbed_symmetry_stream(system).take(prefix_len)
        witnesses = detect_repetitions(prefix, 0, threshold)
        assert len(witnesses) >= 4, system
        report = condition_star(prefix, prefix_len, T=4, min_w=threshold)
        assert report.star_w >= threshold


def test_concat_family_offset_stammering():
    alphabet = Alphabet((1, 2, 3))
    family = ConcatFamily(alphabet, random_equal_blocks(alphabet, 4, seed=0), 4)
    prefix = concat_family_stream(family).take(12000)
    report = condition_star_star(prefix, 12000, T=5, min_w=2, max_wprime=Fraction(2, 3))
    assert report.starstar is not None
    w, w_prime = report.starstar
    assert w >= 2
    assert w_prime <= Fraction(2, 3)
    assert len(report.starstar_witnesses) == 5
    assert all(verify_witness(prefix, witness) for witness in report.starstar_witnesses)


def test_condition_parameter_errors():
    with pytest.raises(DetectorError):
        condition_star([1, 2] * 10, 9)
    with pytest.raises(DetectorError):
        condition_star([1, 2] * 10, 20, T=2)
    with pytest.raises(DetectorError):
        condition_star([1, 2] * 5, 20)
    with pytest.raises(DetectorError):
        condition_star_star([1, 2] * 10, 20, max_wprime=-1)


def test_verdict_offset_zero_rules():
    report = ConditionReport(witnesses=[], T=3, prefix_len=100, star_w=Fraction(2))
    verdict = criterion_verdict(report, _growth(2.0, 1.5))
    assert (verdict.rule, verdict.w, verdict.w_prime, verdict.margin) == ("TheoremA_w2", 2, 0, 1.0)

    report = ConditionReport(witnesses=[], T=3, prefix_len=100, star_w=Fraction(9, 8))
    assert criterion_verdict(report, _growth(2.0, 1.5)).rule == "TheoremA_bounded"
    assert criterion_verdict(report, _growth(2.0, 1.5)).margin == pytest.approx(0.125)
    unbounded = criterion_verdict(report, _growth(2.0, 1.5), bounded=False)
    assert unbounded.rule == "Inconclusive"
    assert unbounded.margin is None
    assert unbounded.w == Fraction(9, 8)


def test_verdict_offset_rules():
    report = ConditionReport(
        witnesses=[], T=3, prefix_len=100, starstar=(Fraction(3, 2), Fraction(1, 6))
    )
    verdict = criterion_verdict(report, _growth(1.6, 1.6))
    assert verdict.rule == "Theorem31"
    assert verdict.margin == pytest.approx(1 / 3, abs=1e-9)

    weak = ConditionReport(witnesses=[], T=3, prefix_len=100, starstar=(Fraction(6, 5), Fraction(1, 4)))
    verdict = criterion_verdict(weak, _growth(3.0, 2.0))
    assert verdict.rule == "Inconclusive"
    assert (verdict.w, verdict.w_prime) == (Fraction(6, 5), Fraction(1, 4))


def test_verdict_periodic_and_degenerate_growth():
    report = ConditionReport(witnesses=[], T=3, prefix_len=100, star_w=Fraction(2))
    verdict = criterion_verdict(report, _growth(2.0, 2.0), periodic=(0, 2))
    assert verdict.rule == "Inconclusive"
    assert verdict.periodic == (0, 2)
    assert verdict.to_dict()["periodic"] == [0, 2]
    with pytest.raises(GrowthError):
        criterion_verdict(report, _growth(1.0, 1.0))


def test_rhs_monotone_in_rho():
    for w_prime in (Fraction(0), Fraction(1, 6), Fraction(1, 2), Fraction(1)):
        for rho in (1.0, 1.1, 1.5, 2.0, 3.0):
            assert rhs_theorem31(w_prime, rho) <= rhs_theorem_b(w_prime, rho)
    assert rhs_theorem31(Fraction(1, 6), 1.0) == pytest.approx(7 / 6)
    assert rhs_theorem_b(Fraction(0), 1.5) == pytest.approx(1.5)


def test_periodicity_scan():
    assert periodicity_scan([1, 2] * 50, 100, 10, 10) == (0, 2)
    assert periodicity_scan([3] + [1, 2, 2] * 33, 100, 10, 10) == (1, 3)
    prefix = davison_stream(DavisonParams(parse_theta("golden"), 2)).take(1000)
    assert periodicity_scan(prefix, 1000, 30, 30) is None
    with pytest.raises(DetectorError):
        periodicity_scan([1, 2] * 50, 100, 50, 1)


def test_report_serialization():
    report = condition_star([1, 1, 2, 1, 1, 2, 1, 1, 2, 1, 1, 2], 12, T=3)
    data = report.to_dict()
    assert data["T"] == 3 and data["prefix_len"] == 12
    assert data["star_w"] == {"num": report.star_w.numerator, "den": report.star_w.denominator}
    assert data["starstar"] is None
    text = format_witnesses(report)
    assert text.splitlines()[0] == "0 1 2/1"
    assert "# starstar -" in text
    assert RepetitionWitness(2, 3, Fraction(5, 3)).to_dict() == {"r": 2, "s": 3, "w_num": 5, "w_den": 3}
