"""Eigenvalue solvers against closed-form and series ground truth."""

from fractions import Fraction

import pytest
from mpmath import mp

from doublewell.instanton import separation_series
from doublewell.spectral import (
    SolverConfig,
    _basis_schedule_runner,
    basis_eigenvalue,
    lattice_eigenvalue,
    splitting_and_mean,
    splitting_guard_digits,
)


def test_guard_rule_values():
    assert splitting_guard_digits(Fraction(1, 200)) == 35
    assert splitting_guard_digits(Fraction(1, 1000)) == 93
    assert splitting_guard_digits(Fraction(1, 10)) == 21


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(target_digits=0)
    with pytest.raises(ValueError):
        SolverConfig(guard_digits=-1)
    with pytest.raises(ValueError):
        SolverConfig(basis_schedule=(8, 8))
    with pytest.raises(ValueError):
        SolverConfig(centers=())
    cfg = SolverConfig(target_digits=30)
    assert cfg.working_digits() == 50
    assert cfg.working_digits(extra_guard=93) == 123


def test_schedule_shape():
    sched = SolverConfig(schedule_cap=100).schedule()
    assert sched[:3] == (8, 12, 16)
    assert sched[-1] == 100
    assert all(b > a for a, b in zip(sched, sched[1:]))
    assert SolverConfig(basis_schedule=(10, 20)).schedule() == (10, 20)


def test_harmonic_exact_width():
    cfg = SolverConfig.harmonic_validation(target_digits=25)
    res = basis_eigenvalue(0, "+", Fraction(1, 100), cfg)
    with mp.workdps(30):
        assert abs(res.energy - mp.mpf(1) / 2) < mp.mpf("1e-24")
    assert res.method == "basis"


def test_harmonic_stretched_width():
    # width_factor away from 1 forces real work out of every operator
    # band and the overlap treatment; the answer must still be 1/2.
    cfg = SolverConfig.harmonic_validation(
        target_digits=30, width_factor=1.3
    )
    res = basis_eigenvalue(0, "+", Fraction(1, 50), cfg)
    with mp.workdps(40):
        assert abs(res.energy - mp.mpf(1) / 2) < mp.mpf("1e-28")


def test_harmonic_odd_sector():
    cfg = SolverConfig.harmonic_validation(target_digits=25)
    res = basis_eigenvalue(0, "-", Fraction(1, 100), cfg)
    with mp.workdps(30):
        assert abs(res.energy - mp.mpf(3) / 2) < mp.mpf("1e-23")


def test_lattice_harmonic():
    cfg = SolverConfig.harmonic_validation(target_digits=18)
    res = lattice_eigenvalue(0, "+", Fraction(1, 100), cfg)
    with mp.workdps(30):
        assert abs(res.energy - mp.mpf(1) / 2) < mp.mpf("1e-17")
    assert res.method == "lattice"
    assert len(res.levels) >= 2


def test_decoupled_wells_match_series():
    # At g = 1e-6 the truncated series is good to the g^3 term.
    g = Fraction(1, 10**6)
    res = basis_eigenvalue(0, "+", g, SolverConfig(target_digits=25))
    with mp.workdps(40):
        gv = mp.mpf(1) / 10**6
        model = mp.mpf(1) / 2 - gv - mp.mpf(9) / 2 * gv**2
        assert abs(res.energy - model) < mp.mpf("5e-17")


def test_variational_history_is_monotone():
    cfg = SolverConfig(target_digits=12)
    work = cfg.working_digits()
    with mp.workdps(work):
        history = _basis_schedule_runner(
            [(0, "+")], mp.mpf(1) / 20, cfg, work
        )[0]
        energies = [e for _, e in history]
        assert len(energies) >= 3
        for earlier, later in zip(energies, energies[1:]):
            assert later <= earlier + mp.mpf(10) ** (-(work - 5))


def test_parity_ordering():
    cfg = SolverConfig(target_digits=15)
    g = Fraction(1, 25)
    plus = basis_eigenvalue(0, "+", g, cfg)
    minus = basis_eigenvalue(0, "-", g, cfg)
    assert minus.energy > plus.energy


@pytest.mark.slow
def test_methods_agree_on_double_well():
    g = Fraction(1, 100)
    basis = basis_eigenvalue(0, "+", g, SolverConfig(target_digits=25))
    lattice = lattice_eigenvalue(0, "+", g, SolverConfig(target_digits=18))
    with mp.workdps(35):
        assert abs(basis.energy - lattice.energy) < mp.mpf("1e-16")
        assert basis.error_estimate < mp.mpf("1e-24")


def test_splitting_rejects_thin_guard():
    with pytest.raises(ValueError):
        splitting_and_mean(
            Fraction(1, 200), SolverConfig(guard_digits=10)
        )


@pytest.mark.slow
def test_splitting_against_one_instanton():
    g = Fraction(1, 200)
    result = splitting_and_mean(g, SolverConfig(target_digits=25))
    model = separation_series(g, digits=35)
    with mp.workdps(40):
        rel = abs(result.splitting - model) / model
        assert rel < mp.mpf("1e-4")
        assert result.splitting > 0
        assert result.splitting_error < result.splitting * mp.mpf("1e-6")
        mean_wells = (result.minus.energy + result.plus.energy) / 2
        assert abs(result.mean - mean_wells) < mp.mpf("1e-30")
    assert result.minus.size == result.plus.size


def test_checkpoint_resume_is_consistent(tmp_path):
    g = Fraction(1, 25)
    path = str(tmp_path / "run.json")
    cfg = SolverConfig(target_digits=18, checkpoint=path)
    first = basis_eigenvalue(0, "+", g, cfg)
    assert (tmp_path / "run.json").exists()
    again = basis_eigenvalue(0, "+", g, cfg)
    with mp.workdps(30):
        assert abs(first.energy - again.energy) < mp.mpf("1e-18")


def test_result_json_shape():
    cfg = SolverConfig.harmonic_validation(target_digits=15)
    res = basis_eigenvalue(0, "+", Fraction(1, 100), cfg)
    import json

    doc = json.loads(res.to_json(digits=15))
    assert doc["schema"] == "doublewell/spectral-result/v1"
    assert doc["method"] == "basis"
    assert doc["N"] == 0 and doc["parity"] == "+"


def test_unknown_parity_rejected():
    with pytest.raises(ValueError):
        basis_eigenvalue(0, "x", Fraction(1, 100))
