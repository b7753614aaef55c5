"""Sequence acceleration and large-order growth extraction."""

import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doublewell.perturbation import RationalSeries
from doublewell.richardson import (
    GrowthReport,
    growth_coefficients,
    predicted_coefficient,
    richardson_extrapolate,
    richardson_geometric,
)

small_fractions = st.fractions(
    min_value=Fraction(-50), max_value=Fraction(50), max_denominator=20
)


@given(
    limit=small_fractions,
    tail=st.lists(small_fractions, min_size=0, max_size=5),
    k_start=st.integers(1, 9),
    extra=st.integers(0, 4),
)
def test_annihilates_inverse_power_tails(limit, tail, k_start, extra):
    # s_K = limit + sum_j a_j / K^j is mapped to the limit exactly.
    order = len(tail)
    npts = order + 1 + extra
    seq = []
    for i in range(npts):
        K = k_start + i
        seq.append(
            limit
            + sum(a / Fraction(K) ** (j + 1) for j, a in enumerate(tail))
        )
    assert richardson_extrapolate(seq, order, k_start=k_start) == limit


def test_needs_enough_points():
    with pytest.raises(ValueError):
        richardson_extrapolate([Fraction(1)], 1)


@given(
    limit=small_fractions,
    c1=small_fractions,
    c2=small_fractions,
)
@settings(max_examples=15)
def test_geometric_tableau_kills_power_errors(limit, c1, c2):
    # s_j = limit + c1/4^j + c2/16^j, the lattice refinement model.
    seq = [
        limit + c1 * Fraction(1, 4) ** j + c2 * Fraction(1, 16) ** j
        for j in range(4)
    ]
    got = richardson_geometric(seq, ratio=4, dps=40)
    with mp.workdps(40):
        err = abs(got - mp.mpf(limit.numerator) / limit.denominator)
        assert err < mp.mpf("1e-30")


def test_growth_recovers_planted_constants():
    # E_K = -3^(K+1) K! (a0 + a1/K + a2/K^2) exactly, so the extracted
    # constants should equal pi a_j up to the arithmetic floor.
    a0, a1, a2 = Fraction(1), Fraction(-53, 18), Fraction(-1277, 648)
    coeffs = [Fraction(0)] * 30
    for K in range(30, 81):
        r = a0 + a1 / K + a2 / Fraction(K) ** 2
        coeffs.append(-(3 ** (K + 1)) * math.factorial(K) * r)
    series = RationalSeries("g", tuple(coeffs))
    report = growth_coefficients(series, 40, 80, depth=10, digits=25)
    with mp.workdps(40):
        for got, planted in (
            (report.leading, a0),
            (report.inverse_k, a1),
            (report.inverse_k2, a2),
        ):
            want = mp.pi * planted.numerator / planted.denominator
            assert abs(got - want) < mp.mpf("1e-15")


def test_growth_error_estimates_cover(series200):
    report = growth_coefficients(series200, 160, 200, depth=20, digits=30)
    with mp.workdps(50):
        exact = (
            mp.mpf(1),
            mp.mpf(-53) / 18,
            mp.mpf(-1277) / 648,
        )
        for got, want, err in zip(
            (report.leading, report.inverse_k, report.inverse_k2),
            exact,
            report.errors,
        ):
            assert abs(got - want) <= err


def test_growth_window_validation(series200):
    with pytest.raises(ValueError):
        growth_coefficients(series200, 160, 300)
    with pytest.raises(ValueError):
        growth_coefficients(series200, 190, 200, depth=20)


def test_report_roundtrip(series200):
    report = growth_coefficients(series200, 170, 200, depth=12, digits=25)
    back = GrowthReport.from_json(report.to_json())
    assert back.window == report.window
    assert back.depth == report.depth
    with mp.workdps(30):
        assert abs(back.leading - report.leading) < mp.mpf("1e-23")


def test_prediction_tracks_actual_coefficient(series200):
    # The three-term large-order form should be good to O(1/K^3).
    with mp.workdps(40):
        for K in (120, 160, 200):
            actual = mp.mpf(series200[K].numerator) / series200[K].denominator
            pred = predicted_coefficient(K, digits=35)
            rel = abs((pred - actual) / actual)
            assert rel < 30 / mp.mpf(K) ** 3
    with pytest.raises(ValueError):
        predicted_coefficient(0)
