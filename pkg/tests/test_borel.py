"""Borel machinery on series with known transforms."""

import json
import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doublewell.borel import (
    borel_sum_report,
    borel_transform,
    default_orders,
    lateral_laplace,
    pade_approximant,
    real_borel_sum,
)
from doublewell.perturbation import RationalSeries


def _ratio_taylor(p, q, n):
    """Taylor coefficients of p(t)/q(t) through t^n; q[0] must not vanish."""
    c = []
    for k in range(n + 1):
        acc = p[k] if k < len(p) else Fraction(0)
        for j in range(1, min(k, len(q) - 1) + 1):
            acc -= q[j] * c[k - j]
        c.append(acc / q[0])
    return c


def _series_with_transform(c, var="g"):
    """Input series whose Borel transform has Taylor coefficients c."""
    return RationalSeries(
        var, tuple(ck * math.factorial(k) for k, ck in enumerate(c))
    )


@pytest.fixture(scope="module")
def series60(series200):
    return RationalSeries("g", series200.coeffs[:61])


@pytest.fixture(scope="module")
def pades60(series60):
    transform = borel_transform(series60)
    L, M = default_orders(transform)
    main = pade_approximant(transform, L, M, digits=27)
    alt_m = max(M - max(4, M // 4), 1)
    alt = pade_approximant(transform, alt_m, alt_m, digits=27)
    return main, alt


def test_simple_pole_location_both_axes():
    n = 24
    pos = _series_with_transform([Fraction(3) ** k for k in range(n)])
    neg = _series_with_transform([Fraction(-3) ** k for k in range(n)])
    tp = borel_transform(pos)
    tn = borel_transform(neg)
    with mp.workdps(25):
        assert abs(tp.singularity_estimate - mp.mpf(1) / 3) < mp.mpf("1e-20")
        assert tp.singularity_axis == "positive"
        assert abs(tn.singularity_estimate - mp.mpf(1) / 3) < mp.mpf("1e-20")
        assert tn.singularity_axis == "negative"


def test_entire_transform_reports_no_singularity():
    conv = RationalSeries(
        "g", tuple(Fraction(1, 2**k) for k in range(40))
    )
    t = borel_transform(conv)
    assert t.singularity_estimate is None
    assert t.singularity_axis is None


def test_double_well_singularity_seen_at_modest_order(series60):
    t = borel_transform(series60)
    with mp.workdps(25):
        assert abs(t.singularity_estimate - mp.mpf(1) / 3) < mp.mpf("1e-5")
    assert t.singularity_axis == "positive"


def test_default_orders_cap():
    small = borel_transform(
        RationalSeries("g", tuple(Fraction(1) for _ in range(61)))
    )
    assert default_orders(small) == (29, 29)


def test_convergent_series_recovers_ordinary_sum():
    # c_K = 2^-K converges for |g| < 2; the generalized sum must agree
    # with the closed form 1/(1 - g/2).
    conv = RationalSeries("g", tuple(Fraction(1, 2**k) for k in range(40)))
    report = borel_sum_report(conv, Fraction(1, 4), digits=40)
    with mp.workdps(45):
        want = mp.mpf(8) / 7
        assert abs(report.value - want) < mp.mpf("1e-30")


coef = st.fractions(
    min_value=Fraction(-4), max_value=Fraction(4), max_denominator=6
)


@given(
    p=st.lists(coef, min_size=1, max_size=3),
    q_tail=st.lists(coef, min_size=0, max_size=2),
)
@settings(max_examples=20)
def test_pade_reproduces_rational_transforms(p, q_tail):
    q = [Fraction(1)] + q_tail
    c = _ratio_taylor(p, q, 14)
    transform = borel_transform(_series_with_transform(c))
    approx = pade_approximant(transform, 3, 3, digits=30)
    for t in (Fraction(1, 7), Fraction(-1, 5), Fraction(2, 9)):
        qt = sum(cj * t**j for j, cj in enumerate(q))
        if abs(qt) < Fraction(1, 50):
            continue
        pt = sum(cj * t**j for j, cj in enumerate(p))
        with mp.workdps(30):
            want = mp.mpf(pt.numerator) / pt.denominator
            want /= mp.mpf(qt.numerator) / qt.denominator
            got = approx(t)
            assert abs(got - want) <= (1 + abs(want)) * mp.mpf("1e-20")


@given(g=st.fractions(min_value=Fraction(1, 200), max_value=Fraction(1, 8)))
@settings(max_examples=8)
def test_lateral_sums_are_conjugate(g, pades60):
    main, alt = pades60
    digits = 20
    above = lateral_laplace(main, g, "above", digits, alt=alt)
    below = lateral_laplace(main, g, "below", digits, alt=alt)
    with mp.workdps(digits + 5):
        assert abs(above.value - mp.conj(below.value)) < mp.mpf(10) ** (
            -digits
        )


def test_upper_lateral_imaginary_sign(pades60):
    # Small enough g that the discontinuity bracket is clearly positive:
    # integrating over the positive-axis singularity from above gives a
    # negative imaginary part for this one-signed series.
    main, alt = pades60
    s = lateral_laplace(main, Fraction(1, 50), "above", 20, alt=alt)
    assert s.value.imag < 0


def test_report_mean_is_real_and_reuses_approximants(series60, pades60):
    g = Fraction(1, 50)
    direct = borel_sum_report(series60, g, digits=20)
    reused = borel_sum_report(
        series60, g, digits=20, approximants=pades60
    )
    with mp.workdps(25):
        assert abs(direct.value - reused.value) <= (
            direct.error + reused.error + mp.mpf("1e-19")
        )
        assert direct.error >= 0
    fast = real_borel_sum(series60, g, digits=18)
    with mp.workdps(25):
        assert abs(fast - direct.value) < mp.mpf("1e-15")


def test_lateral_json_shape(pades60):
    main, alt = pades60
    s = lateral_laplace(main, Fraction(1, 40), "above", 18, alt=alt)
    doc = json.loads(s.to_json(digits=18))
    assert doc["side"] == "above"
    assert {"real", "imag", "error", "pade_orders"} <= set(doc)


def test_side_validation(pades60):
    main, _ = pades60
    with pytest.raises(ValueError):
        lateral_laplace(main, Fraction(1, 40), "left", 18)
