import warnings
from math import comb, factorial

import numpy as np
import pytest
from scipy.special import eval_genlaguerre

from vibronic.fockspace import (
    HilbertConfig,
    ModeParams,
    StateSpec,
    TruncationWarning,
    basis_state,
    coupling_f,
    coupling_f_grid,
    density_defects,
    displacement,
    fidelity,
    laguerre,
    laguerre_seq,
    make_vib_state,
    make_vib_vector,
    mode_operators,
    reduce_electronic,
    reduce_vibrational,
    thermal_weights,
    truncation_guard,
)


def lag_series(n, k, x):
    # independent oracle: finite series sum for L_n^k(x)
    return sum((-1) ** i * comb(n + k, n - i) * x**i / factorial(i) for i in range(n + 1))


def test_laguerre_frozen_value():
    # series oracle at n=2, k=1, x = 0.23^2
    assert laguerre(2, 1, 0.0529) == pytest.approx(2.8426992049999997, abs=1e-12)


def test_laguerre_against_series_oracle():
    rng = np.random.default_rng(11)
    for _ in range(300):
        n = int(rng.integers(0, 30))
        k = int(rng.integers(0, 4))
        x = float(rng.uniform(0.0, 1.5))
        ref = lag_series(n, k, x)
        # the series oracle itself cancels ~5 digits at n ~ 30; the
        # recurrence is the stable route, so compare loosely
        assert laguerre(n, k, x) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_laguerre_against_scipy():
    rng = np.random.default_rng(12)
    for _ in range(100):
        n = int(rng.integers(0, 40))
        k = int(rng.integers(0, 5))
        x = float(rng.uniform(0.0, 2.0))
        assert laguerre(n, k, x) == pytest.approx(
            float(eval_genlaguerre(n, k, x)), rel=1e-10, abs=1e-10
        )


def test_laguerre_seq_matches_scalar():
    seq = laguerre_seq(25, 2, 0.0529)
    for n in range(26):
        assert seq[n] == laguerre(n, 2, 0.0529)


def test_laguerre_rejects_negative():
    with pytest.raises(ValueError):
        laguerre(-1, 0, 0.1)
    with pytest.raises(ValueError):
        laguerre(2, -1, 0.1)


def test_mode_params_stretch_default():
    m = ModeParams(eta=0.23)
    assert m.eta_r == pytest.approx(0.23 * 3 ** (-0.25), abs=1e-15)
    assert m.nu == 1.0
    m2 = ModeParams(eta=0.1, eta_r=0.05)
    assert m2.eta_r == 0.05


def test_mode_params_validation():
    with pytest.raises(ValueError):
        ModeParams(eta=-0.1)
    with pytest.raises(ValueError):
        ModeParams(eta=0.1, nu=0.0)


def test_coupling_frozen_value():
    # independent series-sum oracle:
    # exp(-(eta^2+eta_r^2)/2) * 2!/3! * L_2^1(eta^2) * L_1^0(eta_r^2)
    m = ModeParams(eta=0.23)
    assert coupling_f(2, 1, 1, m) == pytest.approx(0.881088566502069, abs=1e-14)


def test_coupling_k0_is_debye_waller_times_laguerres():
    m = ModeParams(eta=0.1)
    env = np.exp(-(m.eta**2 + m.eta_r**2) / 2)
    assert coupling_f(0, 0, 0, m) == pytest.approx(env, abs=1e-15)
    assert coupling_f(0, 0, 0, m) == pytest.approx(0.992144267477965, abs=1e-14)
    # k=0 keeps the plain product of both zeroth-order Laguerre factors
    assert coupling_f(3, 2, 0, m) == pytest.approx(
        env * lag_series(3, 0, m.eta**2) * lag_series(2, 0, m.eta_r**2), rel=1e-12
    )


def test_coupling_large_n_no_overflow():
    # factorial ratio as running product must survive n ~ 150
    m = ModeParams(eta=0.1)
    val = coupling_f(150, 0, 2, m)
    assert np.isfinite(val)


def test_coupling_grid_matches_scalar():
    m = ModeParams(eta=0.23)
    g = coupling_f_grid(5, 4, 1, m)
    assert g.shape == (6, 5)
    for n_c in range(6):
        for n_r in range(5):
            assert g[n_c, n_r] == coupling_f(n_c, n_r, 1, m)


def test_joint_index_ordering():
    # electronic slowest, then n_c, then n_r fastest
    cfg = HilbertConfig(n_max_c=2, n_max_r=1)
    assert cfg.dim == 4 * 3 * 2
    assert cfg.joint_index("dd", 0, 0) == 0
    assert cfg.joint_index("dd", 0, 1) == 1
    assert cfg.joint_index("dd", 1, 0) == 2
    assert cfg.joint_index("du", 0, 0) == cfg.dim_vib
    assert cfg.joint_index("ud", 0, 0) == 2 * cfg.dim_vib
    assert cfg.joint_index("uu", 2, 1) == cfg.dim - 1
    with pytest.raises(ValueError):
        cfg.joint_index("dd", 3, 0)
    with pytest.raises(ValueError):
        cfg.joint_index("xx", 0, 0)


def test_ladder_commutator_truncation_defect():
    cfg = HilbertConfig(n_max_c=5, n_max_r=3)
    ops = mode_operators(cfg)
    comm = ops.a @ ops.a_dag - ops.a_dag @ ops.a
    expected = np.kron(
        np.eye(4),
        np.kron(np.diag([1.0] * 5 + [-5.0]), np.eye(4)),
    )
    assert np.max(np.abs(comm - expected)) < 1e-12
    # number operator consistent with a^dag a
    assert np.max(np.abs(ops.a_dag @ ops.a - ops.n_c)) < 1e-12
    assert np.max(np.abs(ops.b_dag @ ops.b - ops.n_r)) < 1e-12


def disp_element(m, n, alpha):
    # analytic matrix-element oracle in terms of Laguerre polynomials;
    # the m < n block follows from D(alpha)^dag = D(-alpha)
    if m < n:
        return np.conj(disp_element(n, m, -alpha))
    return (
        np.sqrt(factorial(n) / factorial(m))
        * alpha ** (m - n)
        * np.exp(-abs(alpha) ** 2 / 2)
        * lag_series(n, m - n, abs(alpha) ** 2)
    )


def test_displacement_vacuum_amplitude():
    cfg = HilbertConfig(n_max_c=20, n_max_r=20)
    for alpha in (0.3, 0.7 - 0.2j, 1.0):
        d = displacement(alpha, "c", cfg)
        assert abs(d[0, 0] - np.exp(-abs(alpha) ** 2 / 2)) < 1e-10
    d = displacement(1.0, "r", cfg)
    assert abs(d[0, 0] - 0.6065306597126334) < 1e-10


def test_displacement_matrix_elements_against_analytic_oracle():
    cfg = HilbertConfig(n_max_c=30, n_max_r=0)
    rng = np.random.default_rng(21)
    for _ in range(5):
        alpha = complex(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8))
        d = displacement(alpha, "c", cfg)
        # far from the cutoff the truncated exponential reproduces the
        # analytic elements
        for m in range(8):
            for n in range(8):
                assert abs(d[m, n] - disp_element(m, n, alpha)) < 1e-9


def test_displacement_unitary_and_inverse():
    cfg = HilbertConfig(n_max_c=20, n_max_r=5)
    d = displacement(0.8 + 0.1j, "c", cfg)
    assert np.max(np.abs(d @ d.conj().T - np.eye(cfg.dim_c))) < 1e-12
    dm = displacement(-(0.8 + 0.1j), "c", cfg)
    assert np.max(np.abs(d @ dm - np.eye(cfg.dim_c))) < 1e-9


def test_displacement_truncation_warning():
    cfg = HilbertConfig(n_max_c=4, n_max_r=4)
    with pytest.warns(TruncationWarning):
        displacement(1.5, "c", cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        displacement(0.2, "c", cfg)  # |alpha|^2 = 0.04 < 1: silent


def test_thermal_weights_geometric():
    w = thermal_weights(0.5, 40)
    # frozen from nbar^n/(nbar+1)^(n+1); renormalization on 40 levels is ~1e-8
    ref = np.array(
        [0.6666666666666666, 0.2222222222222222, 0.07407407407407407,
         0.024691358024691357, 0.00823045267489712]
    )
    assert np.allclose(w[:5], ref, rtol=1e-7)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    w0 = thermal_weights(0.0, 7)
    assert w0[0] == 1.0 and w0[1:].max() == 0.0
    with pytest.raises(ValueError):
        thermal_weights(-0.1, 5)


def test_make_vib_state_fock_and_validity():
    cfg = HilbertConfig(n_max_c=6, n_max_r=4)
    rho = make_vib_state(StateSpec.fock(2, 1), cfg)
    pops = rho.populations()
    assert pops[2, 1] == 1.0
    assert pops.sum() == pytest.approx(1.0)
    d = density_defects(rho)
    assert d["hermiticity"] < 1e-12
    assert d["trace_error"] < 1e-9
    assert d["min_eigenvalue"] > -1e-10


def test_make_vib_state_thermal_product():
    cfg = HilbertConfig(n_max_c=14, n_max_r=14)
    rho = make_vib_state(StateSpec.thermal(0.5, 0.2), cfg)
    pops = rho.populations()
    assert pops[0, 0] == pytest.approx((2 / 3) * (1 / 1.2), rel=1e-6)
    assert rho.trace() == pytest.approx(1.0, abs=1e-12)
    d = density_defects(rho)
    assert d["min_eigenvalue"] > -1e-12


def test_make_vib_state_coherent_poisson_populations():
    cfg = HilbertConfig(n_max_c=20, n_max_r=3)
    alpha = 0.8
    rho = make_vib_state(StateSpec.coherent(alpha, 0.0), cfg)
    pops = rho.populations()
    n = np.arange(6)
    poisson = np.exp(-(alpha**2)) * alpha ** (2 * n) / np.array([factorial(i) for i in n])
    assert np.allclose(pops[:6, 0], poisson, atol=1e-9)
    assert np.max(pops[:, 1:]) < 1e-15  # stretch mode stays in vacuum


def test_make_vib_state_superposition():
    cfg = HilbertConfig(n_max_c=6, n_max_r=2)
    rho = make_vib_state(
        StateSpec.superposition([(0, 0, 1.0), (2, 0, 1.0)]), cfg
    )
    pops = rho.populations()
    assert pops[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert pops[2, 0] == pytest.approx(0.5, abs=1e-12)
    # coherence survives
    i00 = cfg.vib_index(0, 0)
    i20 = cfg.vib_index(2, 0)
    assert abs(rho.matrix[i00, i20]) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        make_vib_state(StateSpec.superposition([(0, 0, 0.0)]), cfg)
    with pytest.raises(ValueError):
        make_vib_state(StateSpec.superposition([(9, 0, 1.0)]), cfg)


def test_fidelity_and_mismatch():
    cfg = HilbertConfig(n_max_c=3, n_max_r=2)
    s = basis_state(cfg, "dd", 1, 0)
    t = basis_state(cfg, "dd", 1, 0)
    assert fidelity(s, t) == 1.0
    u = basis_state(cfg, "uu", 1, 0)
    assert fidelity(s, u) == 0.0
    other = basis_state(HilbertConfig(n_max_c=4, n_max_r=2), "dd", 1, 0)
    with pytest.raises(ValueError):
        fidelity(s, other)


def test_partial_traces():
    cfg = HilbertConfig(n_max_c=2, n_max_r=1)
    amps = np.zeros(cfg.dim, complex)
    amps[cfg.joint_index("dd", 0, 0)] = 1 / np.sqrt(2)
    amps[cfg.joint_index("uu", 1, 1)] = 1j / np.sqrt(2)
    from vibronic.fockspace import JointState

    st = JointState(amps, cfg)
    rho_e = reduce_electronic(st)
    assert rho_e[0, 0] == pytest.approx(0.5)
    assert rho_e[3, 3] == pytest.approx(0.5)
    assert abs(rho_e[0, 3]) < 1e-15  # vibrational parts orthogonal -> no coherence
    rho_v = reduce_vibrational(st)
    assert rho_v.trace() == pytest.approx(1.0)
    pops = rho_v.populations()
    assert pops[0, 0] == pytest.approx(0.5)
    assert pops[1, 1] == pytest.approx(0.5)


def test_truncation_guard():
    cfg = HilbertConfig(n_max_c=6, n_max_r=6)
    with pytest.warns(TruncationWarning):
        make_vib_state(StateSpec.fock(6, 0), cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rho = make_vib_state(StateSpec.fock(1, 0), cfg)
    assert truncation_guard(rho) < 1e-12


def test_make_vib_vector_matches_density():
    cfg = HilbertConfig(n_max_c=8, n_max_r=7)
    for spec in (
        StateSpec.fock(2, 1),
        StateSpec.coherent(0.5, -0.3j),
        StateSpec.superposition([(0, 0, 1.0), (2, 0, 1.0j)]),
    ):
        vec = make_vib_vector(spec, cfg)
        rho = make_vib_state(spec, cfg)
        assert np.abs(np.outer(vec, vec.conj()) - rho.matrix).max() < 1e-12
        assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)


def test_make_vib_vector_rejects_thermal():
    cfg = HilbertConfig(n_max_c=4, n_max_r=3)
    with pytest.raises(ValueError):
        make_vib_vector(StateSpec.thermal(0.2, 0.1), cfg)
