"""Trans-series evaluation: table access, branch structure, Delta."""

from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doublewell.instanton import (
    DeltaReport,
    EpsilonTable,
    GammaRational,
    UnsupportedOrderError,
    delta_asymptotic,
    delta_asymptotic_terms,
    delta_numeric,
    displacement_series,
    instanton_energy,
    instanton_variables,
    separation_series,
)

TABLE = EpsilonTable.default()


def test_reference_entries():
    # The plus-parity slice, exactly as hardcoded.
    assert TABLE.get(0, "+", 1, 0, 0) == GammaRational(Fraction(-1))
    assert TABLE.get(0, "+", 1, 0, 1) == GammaRational(Fraction(71, 12))
    assert TABLE.get(0, "+", 1, 0, 2) == GammaRational(Fraction(6299, 288))
    assert TABLE.get(0, "+", 2, 1, 0) == GammaRational(Fraction(1))
    assert TABLE.get(0, "+", 2, 1, 1) == GammaRational(Fraction(-53, 6))
    assert TABLE.get(0, "+", 2, 1, 2) == GammaRational(Fraction(-1277, 72))
    assert TABLE.get(0, "+", 2, 0, 0) == GammaRational(0, Fraction(1))
    assert TABLE.get(0, "+", 2, 0, 1) == GammaRational(
        Fraction(-23, 2), Fraction(-53, 6)
    )
    assert TABLE.get(0, "+", 2, 0, 2) == GammaRational(
        Fraction(13, 12), Fraction(-1277, 72)
    )


def test_minus_parity_from_sector_rule():
    for n in (1, 2):
        for k in range(n):
            for l in range(3):
                plus = TABLE.get(0, "+", n, k, l)
                minus = TABLE.get(0, "-", n, k, l)
                want = plus.scaled((-1) ** n)
                assert minus == want


def test_coverage_queries():
    assert TABLE.covers(0, "+", 1, 2)
    assert TABLE.covers(0, "-", 2, 2)
    assert not TABLE.covers(0, "+", 1, 3)
    assert not TABLE.covers(0, "+", 3, 0)
    assert not TABLE.covers(1, "+", 1, 0)


def test_gamma_rational_basics():
    x = GammaRational(Fraction(1, 2), Fraction(-2))
    assert str(x) == "1/2 + -2*gamma"
    with mp.workdps(35):
        want = mp.mpf(1) / 2 - 2 * mp.euler
        assert abs(x.evaluate(35) - want) < mp.mpf("1e-33")
    assert (-x) + x == GammaRational(0)


def test_branch_variables_conjugate():
    above = instanton_variables(Fraction(1, 100), "above", digits=30)
    below = instanton_variables(Fraction(1, 100), "below", digits=30)
    with mp.workdps(30):
        assert above.lam.imag > 0
        assert abs(above.lam - mp.conj(below.lam)) < mp.mpf("1e-28")
        assert abs(above.xi - below.xi) < mp.mpf("1e-28")
        assert above.xi > 0


@given(g=st.fractions(min_value=Fraction(1, 400), max_value=Fraction(1, 25)))
@settings(max_examples=10)
def test_separation_matches_closed_bracket(g):
    digits = 35
    got = separation_series(g, l_max=2, digits=digits)
    with mp.workdps(digits + 10):
        gv = mp.mpf(g.numerator) / g.denominator
        xi = mp.exp(-1 / (6 * gv)) / mp.sqrt(mp.pi * gv)
        bracket = 1 - mp.mpf(71) / 12 * gv - mp.mpf(6299) / 288 * gv**2
        want = 2 * xi * bracket
        assert abs(got - want) <= abs(want) * mp.mpf(10) ** (-digits + 3)


def test_one_instanton_energy_halves_the_separation():
    g = Fraction(1, 50)
    digits = 30
    e_plus = instanton_energy(0, "+", 1, g, "above", 2, digits)
    e_minus = instanton_energy(0, "-", 1, g, "above", 2, digits)
    sep = separation_series(g, digits=digits)
    with mp.workdps(digits):
        assert abs(e_plus.imag) == 0
        assert abs((e_minus - e_plus) - sep) < mp.mpf("1e-28")
        assert abs(e_plus + sep / 2) < mp.mpf("1e-28")


def test_displacement_equals_two_instanton_real_part():
    g = Fraction(1, 80)
    digits = 32
    disp = displacement_series(g, digits=digits)
    for side in ("above", "below"):
        e2 = instanton_energy(0, "+", 2, g, side, 2, digits)
        with mp.workdps(digits):
            assert abs(e2.real - disp) < abs(disp) * mp.mpf("1e-25")
    assert disp > 0


def test_two_instanton_imaginary_part_symmetry():
    # Lateral imaginary parts are opposite.  On the upper branch only the
    # single-logarithm term picks up i pi, so the imaginary part equals
    # pi xi^2 (1 - 53 g / 6 - 1277 g^2 / 72) exactly at this order.
    g = Fraction(1, 100)
    digits = 30
    up = instanton_energy(0, "+", 2, g, "above", 2, digits)
    dn = instanton_energy(0, "+", 2, g, "below", 2, digits)
    with mp.workdps(digits):
        assert abs(up.imag + dn.imag) < mp.mpf("1e-28")
        gv = mp.mpf(g.numerator) / g.denominator
        xi2 = mp.exp(-1 / (3 * gv)) / (mp.pi * gv)
        bracket = 1 - mp.mpf(53) / 6 * gv - mp.mpf(1277) / 72 * gv**2
        want = mp.pi * xi2 * bracket
        assert abs(up.imag - want) < abs(want) * mp.mpf("1e-20")


def test_asymptotic_terms_exact():
    terms = delta_asymptotic_terms(2)
    assert terms == {
        (0, 0): Fraction(1),
        (1, 0): Fraction(3),
        (1, 1): Fraction(-23, 2),
        (2, 0): Fraction(53, 2),
        (2, 1): Fraction(-135),
    }


def test_asymptotic_reference_row():
    anchors = {
        "0.005": "1.00640",
        "0.006": "1.00739",
        "0.007": "1.00832",
        "0.008": "1.00919",
        "0.009": "1.01001",
        "0.010": "1.01078",
    }
    for text, want in anchors.items():
        val = delta_asymptotic(Fraction(text), digits=25)
        with mp.workdps(25):
            assert abs(val - mp.mpf(want)) <= mp.mpf("5e-6")


def test_asymptotic_log_expanded_mode():
    val = delta_asymptotic(Fraction(1, 10), log_terms=3, digits=25)
    with mp.workdps(25):
        assert abs(val - mp.mpf("0.86029")) <= mp.mpf("5e-6")
    with pytest.raises(ValueError):
        delta_asymptotic(Fraction(1, 10), log_terms=0)


def test_order_truncation_raises():
    with pytest.raises(UnsupportedOrderError):
        separation_series(Fraction(1, 100), l_max=3)
    with pytest.raises(UnsupportedOrderError):
        displacement_series(Fraction(1, 100), l_max=4)
    with pytest.raises(UnsupportedOrderError):
        delta_asymptotic_terms(3)
    with pytest.raises(UnsupportedOrderError):
        instanton_energy(0, "+", 3, Fraction(1, 100), "above", 2, 30)


def test_delta_numeric_recovers_planted_value():
    g = Fraction(1, 100)
    digits = 40
    with mp.workdps(digits + 10):
        gv = mp.mpf(g.numerator) / g.denominator
        bigl = mp.log(2 / gv) + mp.euler
        s = mp.mpf("1e-6")
        borel = mp.mpf("0.489")
        mean = borel + s**2 * bigl / 4  # plants Delta = 1 exactly
        e_minus = (mean + s / 2, mp.mpf(0))
        e_plus = (mean - s / 2, mp.mpf(0))
    report = delta_numeric(g, e_minus, e_plus, (borel, mp.mpf(0)), digits)
    with mp.workdps(digits):
        assert abs(report.value - 1) < mp.mpf("1e-30")
        assert not report.low_confidence
        assert report.error == 0


def test_delta_numeric_flags_cancellation_loss():
    g = Fraction(1, 100)
    digits = 30
    with mp.workdps(digits + 10):
        s = mp.mpf("1e-6")
        borel = mp.mpf("0.489")
        mean = borel + mp.mpf("1e-14")
        err = mp.mpf("1e-10")  # swamps the 1e-14 displacement
        e_minus = (mean + s / 2, err)
        e_plus = (mean - s / 2, err)
    report = delta_numeric(g, e_minus, e_plus, (borel, mp.mpf(0)), digits)
    assert report.low_confidence
    assert report.error > abs(report.value)


def test_delta_numeric_validates_ordering():
    g = Fraction(1, 100)
    with pytest.raises(ValueError):
        delta_numeric(g, (mp.mpf("0.4"), 0), (mp.mpf("0.5"), 0), (0.3, 0))


def test_delta_report_json_shape():
    g = Fraction(1, 100)
    with mp.workdps(40):
        s = mp.mpf("1e-6")
        borel = mp.mpf("0.489")
        bigl = mp.log(2 / mp.mpf("0.01")) + mp.euler
        mean = borel + s**2 * bigl / 4
        report = delta_numeric(
            g, (mean + s / 2, 0), (mean - s / 2, 0), (borel, 0), 30
        )
    import json

    doc = json.loads(report.to_json(digits=20))
    assert doc["schema"] == "doublewell/delta-report/v1"
    assert doc["low_confidence"] is False
    assert set(doc) >= {
        "delta",
        "delta_error",
        "delta_asymptotic",
        "separation",
        "displacement",
        "borel_real",
        "g",
    }
