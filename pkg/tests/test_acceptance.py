"""End-to-end acceptance battery, one test per numbered check.

Each test runs its check and asserts the recorded verdict, so a failure
message carries the measured numbers.  Check 4 currently fails by
construction: at a detuning of only 20x the sideband coupling the
quarter-period Bell fidelity saturates at 0.9823 (set by the Lamb-Dicke
factor, independent of drive strength), short of the 0.99 bar.  It is
kept red on purpose rather than loosened; see the module docstring of
``vibronic.acceptance``.
"""

from vibronic.acceptance import (
    check_bell_effective,
    check_bell_exact,
    check_closed_forms,
    check_decoupling,
    check_determinism,
    check_lamb_dicke,
    check_roundtrip_noiseless,
    check_roundtrip_shot_noise,
    check_spectrum_grid,
    check_wigner_oracle,
)


def test_check_1_closed_forms():
    res = check_closed_forms()
    assert res.passed, res.details


def test_check_2_decoupling():
    res = check_decoupling()
    assert res.passed, res.details


def test_check_3_bell_effective():
    res = check_bell_effective()
    assert res.passed, res.details


def test_check_4_bell_exact():
    res = check_bell_exact()
    assert res.passed, res.details


def test_check_5_spectrum_grid():
    res = check_spectrum_grid()
    assert res.passed, res.details


def test_check_6_lamb_dicke():
    res = check_lamb_dicke()
    assert res.passed, res.details


def test_check_7_wigner_oracle():
    res = check_wigner_oracle()
    assert res.passed, res.details


def test_check_8_roundtrip_noiseless():
    res = check_roundtrip_noiseless()
    assert res.passed, res.details


def test_check_9_roundtrip_shot_noise():
    res = check_roundtrip_shot_noise()
    assert res.passed, res.details


def test_check_10_determinism():
    res = check_determinism()
    assert res.passed, res.details
