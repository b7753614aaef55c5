"""End-to-end acceptance runs, one test per shipping criterion.

Each test prints a single summary line with the measured quantities so
a verbose run reads as a checklist.  Anchor strings are frozen decimal
expansions; tolerances are part of the contract and are not to be
loosened to make a failing run pass.
"""

import os
import subprocess
import sys
import time
from fractions import Fraction

import pytest
from mpmath import mp

from doublewell import (
    EpsilonTable,
    RationalSeries,
    SolverConfig,
    borel_sum_report,
    borel_transform,
    delta_asymptotic,
    expand_quantization,
    growth_coefficients,
    instanton_energy,
    separation_series,
    splitting_and_mean,
)

from conftest import extended_enabled


GRID = (Fraction(1, 200), Fraction(3, 500), Fraction(7, 1000),
        Fraction(1, 125), Fraction(9, 1000), Fraction(1, 100))

# |E_K| for the three highest generated orders, 31 significant digits.
TAIL_ANCHORS = {
    198: "5.501177696288587935277569438632e464",
    199: "3.284453984165780006162191232835e467",
    200: "1.970821419309543769795300607410e470",
}

ASYMPTOTIC_ANCHORS = ("1.00640", "1.00739", "1.00832",
                      "1.00919", "1.01001", "1.01078")

NUMERIC_ANCHORS = ("1.0063", "1.0075", "1.00832",
                   "1.00919", "1.00998", "1.01078")

# Ground doublet at g = 1/1000: lower level to 50 digits and the
# splitting to 30, from a converged deep run of this package frozen
# against an independent lattice cross-check.
EPLUS_ANCHOR = "0.49899545486210917168913083948192163682094724020809"
SPLITTING_ANCHOR = "1.470464454175092501381989964494e-71"


def _run_cli(args, timeout):
    return subprocess.run(
        [sys.executable, "-m", "doublewell.cli", *args],
        capture_output=True, text=True, timeout=timeout, check=False)


def test_criterion_1_series_to_order_200():
    t0 = time.monotonic()
    proc = _run_cli(["coeffs", "--n", "0", "--kmax", "200"], timeout=600)
    elapsed = time.monotonic() - t0
    assert proc.returncode == 0, proc.stderr
    lines = proc.stdout.splitlines()
    assert len(lines) == 201
    table = {}
    for line in lines:
        k, value = line.split()
        table[int(k)] = Fraction(value)
    assert table[1] == Fraction(-1)
    assert table[2] == Fraction(-9, 2)
    with mp.workdps(45):
        for k, anchor in TAIL_ANCHORS.items():
            got = abs(mp.mpf(table[k].numerator) / table[k].denominator)
            want = mp.mpmathify(anchor)
            assert abs(got - want) <= mp.mpf("1e-29") * want, k
    print(f"PASS criterion-1: 201 coefficients in {elapsed:.1f}s "
          "(cap 600s), orders 1, 2 exact, orders 198..200 match "
          "31-digit anchors")


def test_criterion_2_growth_constants(series200):
    report = growth_coefficients(series200, 160, 200, depth=20, digits=40)
    with mp.workdps(45):
        d0 = abs(report.leading - 1)
        d1 = abs(report.inverse_k + mp.mpf(53) / 18)
        d2 = abs(report.inverse_k2 + mp.mpf(1277) / 648)
        assert d0 <= mp.mpf("1e-20")
        assert d1 <= mp.mpf("1e-15")
        assert d2 <= mp.mpf("1e-10")
        print("PASS criterion-2: growth constants off by "
              f"{mp.nstr(d0, 2)}, {mp.nstr(d1, 2)}, {mp.nstr(d2, 2)} "
              "(tolerances 1e-20, 1e-15, 1e-10)")


def test_criterion_3_asymptotic_delta_values():
    worst = 0.0
    with mp.workdps(30):
        for g, anchor in zip(GRID, ASYMPTOTIC_ANCHORS):
            got = delta_asymptotic(g, digits=25)
            worst = max(worst, abs(float(got - mp.mpmathify(anchor))))
        assert worst <= 5e-6
        # The large-coupling entry follows the expanded-logarithm form.
        big = delta_asymptotic(Fraction(1, 10), log_terms=3, digits=25)
        dev = abs(float(big - mp.mpf("0.86029")))
        assert dev <= 5e-6
    print("PASS criterion-3: six compact-form values within "
          f"{worst:.1e} of anchors; g=1/10 with log_terms=3 within "
          f"{dev:.1e} (tolerance 5e-6)")


def test_criterion_4_table_reproduction():
    t0 = time.monotonic()
    proc = _run_cli(["table1"], timeout=1800)
    elapsed = time.monotonic() - t0
    assert proc.returncode == 0, proc.stderr
    rows = [line.split(",") for line in proc.stdout.splitlines()[1:]]
    assert len(rows) == 7
    worst = 0.0
    for row, anchor in zip(rows, NUMERIC_ANCHORS):
        dev = abs(float(row[1]) - float(anchor))
        worst = max(worst, dev)
        assert dev <= 5e-4, row[0]
    dev_big = abs(float(rows[6][1]) - 0.87684)
    assert dev_big <= 2e-4
    for row, anchor in zip(rows, ASYMPTOTIC_ANCHORS):
        assert abs(float(row[3]) - float(anchor)) <= 5e-6, row[0]
    assert abs(float(rows[6][3]) - 0.86029) <= 5e-6
    print(f"PASS criterion-4: full table in {elapsed:.0f}s (cap 1800s), "
          f"small-g numeric within {worst:.1e} (tolerance 5e-4), "
          f"g=1/10 within {dev_big:.1e} (tolerance 2e-4)")


def test_criterion_5_splitting_matches_one_instanton():
    g = Fraction(1, 200)
    sm = splitting_and_mean(g, SolverConfig(target_digits=33))
    with mp.workdps(60):
        model = separation_series(g, l_max=2, digits=55)
        rel = abs(sm.splitting - model) / model
        assert rel <= mp.mpf("1e-4")
        print("PASS criterion-5: splitting at g=1/200 off the "
              f"two-loop instanton model by {mp.nstr(rel, 2)} relative "
              "(tolerance 1e-4)")


def test_criterion_6_quantization_reproduces_table():
    import json

    table = EpsilonTable.default()
    for parity in ("+", "-"):
        derived = json.loads(
            expand_quantization(N=0, n_max=2, l_max=2,
                                parity=parity).to_json())
        want = json.loads(table.to_json(N=0, parity=parity))
        # The derived document also records its truncation orders; the
        # coefficients and sector labels are what must agree exactly.
        for key in ("entries", "N", "parity"):
            assert derived[key] == want[key], (parity, key)
    print("PASS criterion-6: expansion of the quantization condition "
          "equals the reference coefficient table exactly, both parities")


def test_criterion_7_borel_structure(series200):
    # Conjugacy of the two lateral sums.
    report = borel_sum_report(series200, Fraction(1, 50), digits=25)
    with mp.workdps(30):
        mismatch = abs(report.above.value - mp.conj(report.below.value))
        scale = abs(report.above.value)
        assert mismatch <= mp.mpf("1e-25") * scale

    # A convergent input reproduces its ordinary sum.
    conv = RationalSeries("g", tuple(Fraction(1, 2**k) for k in range(40)))
    conv_report = borel_sum_report(conv, Fraction(1, 4), digits=40)
    with mp.workdps(45):
        conv_dev = abs(conv_report.value - mp.mpf(8) / 7)
        assert conv_dev <= mp.mpf("1e-30")

    # Singularity location of the divergent double-well series.
    transform = borel_transform(series200)
    with mp.workdps(30):
        pole_dev = abs(transform.singularity_estimate - mp.mpf(1) / 3)
        assert pole_dev <= mp.mpf("1e-3")

    # The lateral imaginary part cancels the two-instanton one.
    g = Fraction(1, 100)
    cancel = borel_sum_report(series200, g, digits=30)
    with mp.workdps(40):
        model = instanton_energy(0, "+", 2, g, side="above",
                                 digits=35).imag
        resid = abs(cancel.above.value.imag + model) / abs(model)
        assert resid <= mp.mpf("0.05")
    print("PASS criterion-7: lateral conjugacy to 1e-25, convergent "
          f"check off by {mp.nstr(conv_dev, 2)}, singularity within "
          f"{mp.nstr(pole_dev, 2)} of 1/3, imaginary parts cancel to "
          f"{mp.nstr(resid, 2)} relative (tolerance 0.05)")


@pytest.mark.extended
@pytest.mark.skipif(not extended_enabled(),
                    reason="set DOUBLEWELL_EXTENDED=1 for the deep run")
def test_criterion_8_deep_coupling_doublet():
    t0 = time.monotonic()
    sm = splitting_and_mean(Fraction(1, 1000),
                            SolverConfig(target_digits=60))
    elapsed = time.monotonic() - t0
    with mp.workdps(90):
        eplus_dev = abs(sm.plus - mp.mpmathify(EPLUS_ANCHOR))
        assert eplus_dev <= mp.mpf("1e-40")
        want = mp.mpmathify(SPLITTING_ANCHOR)
        split_rel = abs(sm.splitting - want) / want
        assert split_rel <= mp.mpf("1e-10")
    print(f"PASS criterion-8: deep run in {elapsed:.0f}s, lower level "
          f"off anchor by {mp.nstr(eplus_dev, 2)} (tolerance 1e-40), "
          f"splitting off by {mp.nstr(split_rel, 2)} relative "
          "(tolerance 1e-10)")
