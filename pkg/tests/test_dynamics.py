"""Tests for drive Hamiltonians, propagators and closed-form evolutions."""

import warnings

import numpy as np
import pytest

from vibronic import (
    AdiabaticityWarning,
    BichromaticAction,
    BichromaticParams,
    CarrierParams,
    ConvergenceWarning,
    HilbertConfig,
    JointState,
    ModeParams,
    RotatingWaveWarning,
    basis_state,
    build_bichromatic_H,
    build_carrier_H,
    build_effective_H,
    closed_form_carrier,
    closed_form_dispersive,
    coupling_f,
    coupling_f_grid,
    mode_operators,
    omega_k_scale,
    propagate_bichromatic,
    propagate_const,
    propagate_timedep,
    rabi_effective,
    rabi_spectrum,
    resonance_guard,
)
from vibronic import _kernels


def bell_dd_uu(config, sign, n_c=0, n_r=0):
    dd = basis_state(config, "dd", n_c, n_r)
    uu = basis_state(config, "uu", n_c, n_r)
    return JointState(amps=(dd.amps + sign * uu.amps) / np.sqrt(2.0), config=config)


def test_omega_k_scale_zero_delta_raises():
    with pytest.raises(ValueError):
        omega_k_scale(1, 0.01, 0.0, 0.1)


def test_omega_k_scale_sign_alternates():
    # (i eta)^{2k} brings a factor (-1)^k
    assert omega_k_scale(1, 0.01, 0.01, 0.1) < 0
    assert omega_k_scale(2, 0.01, 0.01, 0.1) > 0
    assert omega_k_scale(1, 0.01, -0.01, 0.1) > 0


def test_rabi_effective_frozen_values():
    p = BichromaticParams.symmetric(k=1, delta=0.01, omega=0.01, modes=ModeParams(eta=0.1))
    assert rabi_effective(0, 0, p) == pytest.approx(0.00019687004949787762, rel=1e-13)
    p2 = BichromaticParams.symmetric(k=1, delta=0.02, omega=0.05, modes=ModeParams(eta=0.23))
    # hand value: 2 |O|^2 (-1) eta^2 / delta * f^2 * (2!/1! - 3!/2!)
    assert rabi_effective(2, 1, p2) == pytest.approx(0.010266793145223376, rel=1e-13)


def test_rabi_effective_ignores_drive_phases():
    rng = np.random.default_rng(7)
    for _ in range(5):
        phase = rng.uniform(-np.pi, np.pi)
        base = BichromaticParams.symmetric(k=2, delta=0.05, omega=0.02, modes=ModeParams(eta=0.2))
        rot = BichromaticParams.symmetric(
            k=2, delta=0.05, omega=0.02 * np.exp(1j * phase), phi=rng.uniform(-3, 3), modes=ModeParams(eta=0.2)
        )
        assert rabi_effective(3, 2, rot) == pytest.approx(rabi_effective(3, 2, base), rel=1e-13)


def test_rabi_spectrum_k0_vanishes():
    p = BichromaticParams.symmetric(k=0, delta=0.05, omega=0.02, modes=ModeParams(eta=0.2))
    spec = rabi_spectrum(p, 6, 3)
    assert np.all(spec.values == 0.0)


def test_rabi_spectrum_min_relative_gap_positive():
    p = BichromaticParams.symmetric(k=1, delta=0.02, omega=0.05, modes=ModeParams(eta=0.23))
    spec = rabi_spectrum(p, 5, 2)
    gap = spec.min_relative_gap()
    assert 0.0 < gap < 1.0


def test_effective_evolution_matches_closed_form():
    # pure math check of the generator vs its closed form, so regime
    # warnings (detuning size, adiabaticity) are expected and silenced
    config = HilbertConfig(n_max_c=5, n_max_r=3)
    rng = np.random.default_rng(11)
    for _ in range(20):
        k = int(rng.integers(1, 3))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = BichromaticParams.symmetric(
                k=k,
                delta=float(rng.uniform(0.5, 1.5)) * (1 if rng.random() < 0.5 else -1),
                omega=float(rng.uniform(0.01, 0.05)) * np.exp(1j * rng.uniform(-np.pi, np.pi)),
                phi=float(rng.uniform(-np.pi, np.pi)),
                phi0=float(rng.uniform(-np.pi, np.pi)),
                modes=ModeParams(eta=float(rng.uniform(0.05, 0.3))),
            )
            h = build_effective_H(p, config)
        n_c = int(rng.integers(0, config.n_max_c + 1))
        n_r = int(rng.integers(0, config.n_max_r + 1))
        t = float(rng.uniform(0, 3.0) / max(abs(rabi_effective(n_c, n_r, p)), 1e-6))
        out = propagate_const(h, basis_state(config, "dd", n_c, n_r), t)
        a_dd, a_uu = closed_form_dispersive(n_c, n_r, p, t)
        tensor = out.tensor()
        assert abs(tensor[0, n_c, n_r] - a_dd) < 1e-12
        assert abs(tensor[3, n_c, n_r] - a_uu) < 1e-12
        # nothing leaves the {dd, uu} pair at this vibrational level
        mask = np.zeros_like(tensor, dtype=bool)
        mask[0, n_c, n_r] = mask[3, n_c, n_r] = True
        assert np.abs(tensor[~mask]).max() < 1e-12


def test_effective_H_detuning_warning():
    config = HilbertConfig(n_max_c=4, n_max_r=1)
    p = BichromaticParams.symmetric(k=1, delta=0.004, omega=0.02, modes=ModeParams(eta=0.1))
    with pytest.warns(AdiabaticityWarning):
        build_effective_H(p, config)


def test_effective_H_rejects_asymmetric_drive():
    config = HilbertConfig(n_max_c=2, n_max_r=1)
    p = BichromaticParams(k=1, k_prime=2, delta=0.1, delta_prime=0.1, omega=0.01, phi=0.0, phi0=0.0, modes=ModeParams(eta=0.1))
    with pytest.raises(ValueError):
        build_effective_H(p, config)


def test_carrier_evolution_matches_closed_form():
    config = HilbertConfig(n_max_c=4, n_max_r=2)
    rng = np.random.default_rng(23)
    for _ in range(20):
        p = CarrierParams(
            omega=float(rng.uniform(0.02, 0.3)) * np.exp(1j * rng.uniform(-np.pi, np.pi)),
            varphi=float(rng.uniform(-np.pi, np.pi)),
            varphi0=float(rng.uniform(-np.pi, np.pi)),
            modes=ModeParams(eta=float(rng.uniform(0.05, 0.3))),
        )
        sign = 1 if rng.random() < 0.5 else -1
        n_c = int(rng.integers(0, config.n_max_c + 1))
        n_r = int(rng.integers(0, config.n_max_r + 1))
        t0 = float(rng.uniform(0, 40.0))
        out = propagate_const(build_carrier_H(p, config), bell_dd_uu(config, sign, n_c, n_r), t0)
        want = closed_form_carrier(sign, p, n_c, n_r, t0)
        assert np.abs(out.tensor()[:, n_c, n_r] - want).max() < 1e-12
        assert abs(np.linalg.norm(want) - 1.0) < 1e-12


def test_carrier_eigenvalues_on_single_level():
    # one vibrational level: the 4x4 carrier block has eigenvalues 0, 0, +/- 2|omega| f_0
    config = HilbertConfig(n_max_c=0, n_max_r=0)
    p = CarrierParams(omega=0.07, varphi=0.3, varphi0=1.1, modes=ModeParams(eta=0.1))
    evals = np.linalg.eigvalsh(build_carrier_H(p, config))
    f0 = coupling_f(0, 0, 0, p.modes)
    want = np.sort([-2 * 0.07 * f0, 0.0, 0.0, 2 * 0.07 * f0])
    assert np.abs(evals - want).max() < 1e-12


def test_bichromatic_H_hermitian_and_stretch_conserving():
    config = HilbertConfig(n_max_c=3, n_max_r=2)
    ops = mode_operators(config)
    p = BichromaticParams(
        k=1, k_prime=2, delta=0.07, delta_prime=0.05, omega=0.03 * np.exp(0.4j),
        phi=0.2, phi0=0.9, modes=ModeParams(eta=0.17),
    )
    for t in (0.0, 1.3, -2.7):
        h = build_bichromatic_H(t, p, config)
        assert np.abs(h - h.conj().T).max() < 1e-15
        # no stretch-mode ladder operators anywhere in the drive
        assert np.abs(h @ ops.n_r - ops.n_r @ h).max() < 1e-15


def test_kernel_constant_drive_matches_eigh():
    # delta = delta' = 0 makes H time independent, so the stepping kernel
    # must reproduce the exact eigendecomposition result, t < 0 included.
    config = HilbertConfig(n_max_c=3, n_max_r=1)
    p = BichromaticParams(
        k=1, k_prime=1, delta=0.0, delta_prime=0.0, omega=0.04 * np.exp(1.1j),
        phi=-0.3, phi0=0.6, modes=ModeParams(eta=0.2),
    )
    psi0 = bell_dd_uu(config, +1, n_c=1, n_r=1)
    h = build_bichromatic_H(0.0, p, config)
    for t in (37.0, -24.0):
        exact = propagate_const(h, psi0, t)
        stepped = propagate_bichromatic(p, config, psi0, t, dt_max=0.25)
        assert np.abs(stepped.amps - exact.amps).max() < 1e-10
        assert abs(stepped.norm() - 1.0) < 1e-12


def test_kernel_matches_dense_generic_integrator():
    config = HilbertConfig(n_max_c=3, n_max_r=1)
    p = BichromaticParams.symmetric(
        k=1, delta=0.07, omega=0.03, phi=0.4, phi0=0.9, modes=ModeParams(eta=0.17)
    )
    psi0 = basis_state(config, "dd", 0, 0)
    t, dt = 40.0, 0.02
    fast = propagate_bichromatic(p, config, psi0, t, dt_max=dt)
    slow = propagate_timedep(lambda s: build_bichromatic_H(s, p, config), psi0, t, dt_max=dt)
    assert np.abs(fast.amps - slow.amps).max() < 1e-11
    assert abs(fast.norm() - 1.0) < 1e-12


@pytest.mark.parametrize("backend", ["numpy", "numba"])
def test_kernel_backends_agree(backend):
    if backend == "numba" and not _kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    config = HilbertConfig(n_max_c=4, n_max_r=2)
    p = BichromaticParams(
        k=2, k_prime=1, delta=0.11, delta_prime=0.06, omega=0.05 * np.exp(0.7j),
        phi=0.1, phi0=-0.4, modes=ModeParams(eta=0.21),
    )
    psi0 = bell_dd_uu(config, -1, n_c=2, n_r=1)
    out = propagate_bichromatic(p, config, psi0, 25.0, dt_max=0.05, backend=backend)
    ref = propagate_bichromatic(p, config, psi0, 25.0, dt_max=0.05, backend="numpy")
    assert np.abs(out.amps - ref.amps).max() < 1e-13
    assert abs(out.norm() - 1.0) < 1e-12


def test_dispersive_leakage_stays_perturbative():
    # far-detuned drive: intermediate |du>, |ud> populations stay at the
    # (coupling / delta)^2 scale instead of order one
    config = HilbertConfig(n_max_c=4, n_max_r=0)
    modes = ModeParams(eta=0.1)
    omega, delta = 0.02, 0.04
    p = BichromaticParams.symmetric(k=1, delta=delta, omega=omega, modes=modes)
    g = modes.eta * omega * coupling_f(0, 0, 1, modes)
    quarter = np.pi / (4 * abs(rabi_effective(0, 0, p)))
    out = propagate_bichromatic(p, config, basis_state(config, "dd", 0, 0), quarter / 4, dt_max=0.05)
    pops = out.tensor()
    leak = float(np.abs(pops[1]).max() ** 2 + np.abs(pops[2]).max() ** 2)
    assert leak < 20.0 * (g / delta) ** 2
    assert leak > 0.0


def test_propagate_const_rejects_nonhermitian():
    config = HilbertConfig(n_max_c=1, n_max_r=0)
    bad = np.zeros((config.dim, config.dim), dtype=complex)
    bad[0, 1] = 1.0
    with pytest.raises(ValueError):
        propagate_const(bad, basis_state(config, "dd", 0, 0), 1.0)


def test_timedep_convergence_warning():
    config = HilbertConfig(n_max_c=2, n_max_r=0)
    p = BichromaticParams.symmetric(k=1, delta=0.15, omega=0.1, modes=ModeParams(eta=0.25))
    psi0 = basis_state(config, "dd", 0, 0)
    with pytest.warns(ConvergenceWarning):
        propagate_timedep(lambda s: build_bichromatic_H(s, p, config), psi0, 60.0, dt_max=8.0, check_tol=1e-12)


def test_rotating_wave_warning():
    with pytest.warns(RotatingWaveWarning):
        BichromaticParams.symmetric(k=1, delta=0.3, omega=0.01, modes=ModeParams(eta=0.1))


def test_resonance_guard_messages():
    modes = ModeParams(eta=0.1)
    clean = BichromaticParams.symmetric(k=1, delta=0.05, omega=0.001, modes=modes)
    assert resonance_guard(clean) == []

    marginal = BichromaticParams.symmetric(k=1, delta=0.002, omega=0.02, modes=modes)
    msgs = resonance_guard(marginal)
    assert len(msgs) == 1 and "marginal" in msgs[0]

    # k = 2 with delta placed right on the m = 1 stretch combination line
    hit_delta = 2.0 - np.sqrt(3.0)
    with pytest.warns(RotatingWaveWarning):
        hot = BichromaticParams.symmetric(k=2, delta=hit_delta, omega=0.05, modes=ModeParams(eta=0.2))
    msgs = resonance_guard(hot)
    assert any("combination line" in m for m in msgs)


def test_lamb_dicke_flattening_of_coupling():
    # halving eta shrinks the spread of f_k across Fock levels by ~eta^2
    for k in (0, 1):
        spreads = []
        for eta in (0.2, 0.1):
            grid = coupling_f_grid(5, 3, k, ModeParams(eta=eta))
            spreads.append(float(grid.max() - grid.min()))
        assert spreads[1] <= 0.3 * spreads[0]
