#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests for letter matrices, spectral bounds and block-family growth.
"""

import itertools
import math

import pytest

from generators import ConcatFamily, random_equal_blocks
from matgrowth import (
    LAMBDA_THRESHOLD,
    Mat2,
    MatrixError,
    alphabet_spectrum,
    bound_check_lower,
    bound_check_upper,
    lemma82_margin,
    lemma82_sweep,
    letter_matrix,
    norm_product_bound,
    operator_norm,
    spectral_radius,
    theorem81_analyze,
    trace_inequality_check,
    word_matrix,
)
from words import Alphabet

ABC = Alphabet((1, 2, 3))


def test_word_matrix_holds_continuants():
    m = word_matrix([1, 2, 3])
    assert m == Mat2(10, 3, 7, 2)
    assert m.det == -1
    assert word_matrix([]) == Mat2.identity()
    assert word_matrix([1, 2, 3]).transpose() == word_matrix([3, 2, 1])
    with pytest.raises(MatrixError):
        letter_matrix(0)


def test_spectral_radius_closed_form():
    for b in (1, 2, 3, 7):
        assert float(spectral_radius(letter_matrix(b))) == pytest.approx((b + math.sqrt(b * b + 4)) / 2, rel=1e-14)
    assert operator_norm(letter_matrix(1)) == pytest.approx((1 + math.sqrt(5)) / 2)
    with pytest.raises(MatrixError):
        spectral_radius(Mat2(0, -1, 1, 0))


def test_alphabet_spectrum():
    spectrum = alphabet_spectrum(ABC)
    assert spectrum.X == pytest.approx(0.85247, abs=1e-5)
    assert spectrum.rho_per_letter[2] == pytest.approx((3 + math.sqrt(13)) / 2)
    assert spectrum.threshold == pytest.approx(3.25988, abs=1e-4)
    assert 3.2599 < float(LAMBDA_THRESHOLD) < 3.2600
    assert spectrum.to_dict()["alphabet"] == [1, 2, 3]
    with pytest.raises(MatrixError):
        alphabet_spectrum(Alphabet((1, 2)))
    with pytest.raises(MatrixError):
        alphabet_spectrum(Alphabet((1, 2, 3, 4)))


def test_radius_margin_of_letter_pairs():
    assert lemma82_margin(1, 2) > 0
    assert lemma82_margin(2, 1) == lemma82_margin(1, 2)
    with pytest.raises(MatrixError):
        lemma82_margin(4, 4)
    sweep = lemma82_sweep(50)
    assert sweep["checked"] == 50 * 49 // 2
    assert sweep["passed"]
    assert sweep["worst"]["margin"] > 0


def test_bound_checks_on_small_word():
    lhs, rhs, ok = bound_check_upper([1, 2, 3], ABC)
    assert lhs == pytest.approx(math.log(10) / 3, abs=1e-4)
    assert rhs == pytest.approx(0.85247, abs=1e-5)
    assert ok
    lhs, rhs, ok = bound_check_lower([1, 2, 3], ABC)
    assert rhs == pytest.approx(0.2924, abs=1e-3)
    assert ok
    k_value, log_bound, ok = norm_product_bound([1, 2, 3], ABC)
    assert k_value == 10
    assert log_bound == pytest.approx(3 * 0.85247, abs=1e-4)
    assert ok


def test_bound_check_input_errors():
    with pytest.raises(MatrixError):
        bound_check_upper([1, 1, 2], ABC)
    with pytest.raises(MatrixError):
        bound_check_lower([1, 2, 3, 3, 2, 1], ABC)
    with pytest.raises(MatrixError):
        norm_product_bound([1, 4], ABC)


def test_bounds_on_random_equal_words():
    for alphabet in (ABC, Alphabet((1, 2, 3, 4, 5))):
        blocks = list(itertools.islice(random_equal_blocks(alphabet, 2, seed=9)(), 5))
        for block in blocks:
            assert bound_check_upper(block, alphabet)[2]
            assert bound_check_lower(block, alphabet)[2]
            assert norm_product_bound(block, alphabet)[2]


def test_trace_inequality_on_arrangements():
    for order in itertools.permutations((1, 2, 3)):
        lhs, rhs, ok = trace_inequality_check(order, ABC)
        assert lhs == 12
        assert rhs == pytest.approx(5 + math.sqrt(29))
        assert ok
    with pytest.raises(MatrixError):
        trace_inequality_check([1, 2, 3, 3], ABC)
    with pytest.raises(MatrixError):
        trace_inequality_check([1, 1, 2, 2, 3, 3], ABC)


def test_block_growth_above_threshold():
    family = ConcatFamily(ABC, random_equal_blocks(ABC, 4, seed=0), 4)
    report = theorem81_analyze(family, 4)
    assert report.threshold_pass
    assert [row.n for row in report.rows] == [2, 3, 4]
    assert [row.len_v for row in report.rows] == [15, 63, 255]
    assert report.all_epsilon_positive
    assert all(row.sandwich_pass for row in report.rows)
    assert report.to_dict()["lam"] == {"num": 4, "den": 1}


def test_block_growth_below_threshold_still_runs():
    family = ConcatFamily(ABC, random_equal_blocks(ABC, 3, seed=1), 3)
    report = theorem81_analyze(family, 3)
    assert not report.threshold_pass
    assert len(report.rows) == 2
    with pytest.raises(MatrixError):
        theorem81_analyze(family, 2)
