"""Built-in acceptance battery: ten numbered end-to-end checks.

Each check exercises one guaranteed property of the package at fixed
tolerances — closed-form agreement, subspace decoupling, Bell-state
fidelities under both engines, spectrum non-degeneracy, Lamb-Dicke
scaling, Wigner oracle identities, tomography round trips with and
without shot noise, and bitwise CLI determinism.  `run_all` returns one
result per check; the CLI `validate` mode and the test suite both report
these verbatim, one PASS/FAIL line each.

Check 4 drives the full bichromatic Hamiltonian in a deliberately
marginal dispersive regime (detuning only 20x the sideband coupling) and
asks for 0.99 Bell fidelity at the quarter-period.  The leakage there is
set by the Lamb-Dicke factor alone and lands at 0.9823, so that clause
fails by construction; the check still verifies the perturbative scaling
(infidelity falls ~4x when the detuning doubles) and the runtime budget.
"""

from __future__ import annotations

import filecmp
import os
import tempfile
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .bellgen import (
    carrier_phase_for,
    make_phi,
    make_psi,
    thermal_bell_scan,
)
from .dynamics import (
    BichromaticParams,
    CarrierParams,
    build_carrier_H,
    build_effective_H,
    closed_form_carrier,
    closed_form_dispersive,
    propagate_const,
    rabi_effective,
    rabi_spectrum,
)
from .fockspace import (
    HilbertConfig,
    JointState,
    ModeParams,
    StateSpec,
    basis_state,
    make_vib_state,
)
from .tomography import (
    WIGNER_BOUND,
    default_tau_grid,
    displace_vib,
    protocol_run,
    wigner_direct,
)


@dataclass(frozen=True)
class AcceptanceResult:
    number: int
    title: str
    passed: bool
    details: str

    def report_line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.number:>2}  {self.title}: {self.details}"


# ---------------------------------------------------------------------------
# 1. closed forms


def check_closed_forms(draws: int = 50, tol: float = 1e-10) -> AcceptanceResult:
    """Propagated amplitudes match the analytic two-level solutions."""
    config = HilbertConfig(n_max_c=8, n_max_r=8)
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(draws):
        k = int(rng.integers(1, 3))
        with warnings.catch_warnings():
            # regime warnings are irrelevant to a generator-vs-closed-form check
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
        n_c = int(rng.integers(0, 9))
        n_r = int(rng.integers(0, 9))
        t = float(rng.uniform(0, 3.0) / max(abs(rabi_effective(n_c, n_r, p)), 1e-6))
        out = propagate_const(h, basis_state(config, "dd", n_c, n_r), t).tensor()
        a_dd, a_uu = closed_form_dispersive(n_c, n_r, p, t)
        worst = max(worst, abs(out[0, n_c, n_r] - a_dd), abs(out[3, n_c, n_r] - a_uu))

        pc = CarrierParams(
            omega=float(rng.uniform(0.02, 0.3)) * np.exp(1j * rng.uniform(-np.pi, np.pi)),
            varphi=float(rng.uniform(-np.pi, np.pi)),
            varphi0=float(rng.uniform(-np.pi, np.pi)),
            modes=p.modes,
        )
        sign = 1 if rng.random() < 0.5 else -1
        dd = basis_state(config, "dd", n_c, n_r)
        uu = basis_state(config, "uu", n_c, n_r)
        start = JointState(amps=(dd.amps + sign * uu.amps) / np.sqrt(2.0), config=config)
        t0 = float(rng.uniform(0, 40.0))
        got = propagate_const(build_carrier_H(pc, config), start, t0).tensor()[:, n_c, n_r]
        worst = max(worst, float(np.abs(got - closed_form_carrier(sign, pc, n_c, n_r, t0)).max()))
    return AcceptanceResult(
        1, "closed-form equivalence",
        worst < tol,
        f"max amplitude deviation {worst:.2e} over {draws} draws (tolerance {tol:.0e})",
    )


# ---------------------------------------------------------------------------
# 2. decoupling


def check_decoupling(tol: float = 1e-12) -> AcceptanceResult:
    """Single-excitation electronic states stay empty under the dispersive drive."""
    config = HilbertConfig(n_max_c=6, n_max_r=4)
    rng = np.random.default_rng(202)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = BichromaticParams.symmetric(
            k=1, delta=0.7, omega=0.05, phi=0.4, phi0=1.1, modes=ModeParams(eta=0.2)
        )
        h = build_effective_H(p, config)
    vib = rng.normal(size=config.dim_vib) + 1j * rng.normal(size=config.dim_vib)
    amps = np.zeros(config.dim, dtype=complex)
    amps[: config.dim_vib] = vib / np.linalg.norm(vib)
    psi0 = JointState(amps=amps, config=config)
    worst = 0.0
    for t in np.linspace(0.0, 2.0e4, 100):
        tens = propagate_const(h, psi0, float(t)).tensor()
        leak = float(np.sum(np.abs(tens[1]) ** 2) + np.sum(np.abs(tens[2]) ** 2))
        worst = max(worst, leak)
    return AcceptanceResult(
        2, "single-excitation decoupling",
        worst < tol,
        f"max population in singly excited states {worst:.2e} at 100 times (tolerance {tol:.0e})",
    )


# ---------------------------------------------------------------------------
# 3. Bell generation, effective engine


def check_bell_effective(tol: float = 1e-10) -> AcceptanceResult:
    config = HilbertConfig(n_max_c=6, n_max_r=3)
    p = BichromaticParams.symmetric(
        k=1, delta=0.15, omega=0.04 * np.exp(0.3j), phi=0.5, phi0=0.9,
        modes=ModeParams(eta=0.15),
    )
    rate = abs(rabi_effective(0, 0, p))
    worst = 0.0
    durations_ok = True
    for sign, quarter in ((1, 1.0), (-1, 3.0)):
        state, fid, seq = make_phi(sign, p, config)
        worst = max(worst, abs(fid - 1.0))
        expected = quarter * np.pi / (4.0 * rate)
        durations_ok &= abs(seq.pulses[0].duration - expected) < 1e-9 * expected
    pc = CarrierParams(
        omega=0.06, varphi=carrier_phase_for(1, p), varphi0=0.8, modes=p.modes
    )
    psi_a, fid_psi, _ = make_psi(1, p, pc, config)
    worst = max(worst, abs(fid_psi - 1.0))
    pc_flip = CarrierParams(
        omega=0.06, varphi=pc.varphi, varphi0=pc.varphi0 + np.pi, modes=p.modes
    )
    psi_b, fid_flip, _ = make_psi(1, p, pc_flip, config)
    worst = max(worst, abs(fid_flip - 1.0))
    overlap = abs(np.vdot(psi_a.amps, psi_b.amps))
    passed = worst < tol and overlap < tol and durations_ok
    return AcceptanceResult(
        3, "Bell generation (effective engine)",
        passed,
        f"max infidelity {worst:.2e}, phase-flipped overlap {overlap:.2e}, "
        f"pulse durations at the quarter/three-quarter period: {durations_ok}",
    )


# ---------------------------------------------------------------------------
# 4. full-Hamiltonian Bell fidelity in the marginal dispersive regime


def check_bell_exact(budget_s: float = 60.0) -> AcceptanceResult:
    modes = ModeParams(eta=0.1)
    config = HilbertConfig(n_max_c=10, n_max_r=2)  # stretch quanta are exactly conserved
    omega = 0.03
    start = time.perf_counter()
    fids = {}
    for mult in (1, 2):
        delta = 20.0 * modes.eta * omega * mult
        p = BichromaticParams.symmetric(k=1, delta=delta, omega=omega, modes=modes)
        _, fid, _ = make_phi(1, p, config, engine="exact", dt_max=0.05)
        fids[mult] = fid
    elapsed = time.perf_counter() - start
    ratio = (1.0 - fids[1]) / (1.0 - fids[2])
    fid_ok = fids[1] >= 0.99
    ratio_ok = 2.5 <= ratio <= 6.0
    time_ok = elapsed < budget_s
    return AcceptanceResult(
        4, "full-drive Bell fidelity at detuning 20x the coupling",
        fid_ok and ratio_ok and time_ok,
        f"fidelity {fids[1]:.5f} (need >= 0.99), infidelity ratio on doubling "
        f"the detuning {ratio:.2f} (need 2.5..6), runtime {elapsed:.1f}s (budget {budget_s:.0f}s)",
    )


# ---------------------------------------------------------------------------
# 5. spectrum non-degeneracy


def check_spectrum_grid() -> AcceptanceResult:
    p = BichromaticParams.symmetric(
        k=1, delta=0.02, omega=0.05, modes=ModeParams(eta=0.23)
    )
    spec = rabi_spectrum(p, 25, 25)
    gap = spec.min_relative_gap()
    one_sign = bool(np.all(spec.values > 0) or np.all(spec.values < 0))
    passed = gap > 1e-6 and one_sign
    return AcceptanceResult(
        5, "first-sideband rate grid is non-degenerate",
        passed,
        f"min relative gap {gap:.3e} over 26x26 levels (need > 1e-6), single sign: {one_sign}",
    )


# ---------------------------------------------------------------------------
# 6. Lamb-Dicke robustness


def check_lamb_dicke() -> AcceptanceResult:
    fid = thermal_bell_scan(
        0.5, 0.5,
        BichromaticParams.symmetric(k=1, delta=0.15, omega=0.05, modes=ModeParams(eta=0.02)),
    )
    spreads = {}
    for eta in (0.02, 0.01):
        p = BichromaticParams.symmetric(k=1, delta=0.15, omega=0.05, modes=ModeParams(eta=eta))
        values = rabi_spectrum(p, 25, 25).values
        spreads[eta] = float(np.max(np.abs(values / values[0, 0] - 1.0)))
    shrink = spreads[0.01] / spreads[0.02]
    passed = fid >= 0.999 and shrink <= 0.3
    return AcceptanceResult(
        6, "Lamb-Dicke robustness",
        passed,
        f"thermal nbar=0.5 Bell fidelity {fid:.6f} (need >= 0.999), rate dispersion "
        f"shrinks {shrink:.3f}x when eta halves (need <= 0.3)",
    )


# ---------------------------------------------------------------------------
# 7. Wigner oracle identities


def check_wigner_oracle() -> AcceptanceResult:
    config = HilbertConfig(n_max_c=20, n_max_r=20)
    vacuum = make_vib_state(StateSpec.fock(0, 0), config)
    origin_err = abs(wigner_direct(vacuum, 0.0, 0.0) - WIGNER_BOUND)
    points = [
        (0.3 + 0.0j, 0.0j),
        (0.0j, 0.5j),
        (0.7 + 0.2j, -0.4j),
        (-0.8 + 0.0j, 0.6 + 0.0j),
        (1.0 + 0.0j, 0.0j),
        (0.5 + 0.5j, 0.5 - 0.5j),
    ]
    worst = 0.0
    for ac, ar in points:
        want = WIGNER_BOUND * np.exp(-2.0 * abs(ac) ** 2 - 2.0 * abs(ar) ** 2)
        worst = max(worst, abs(wigner_direct(vacuum, ac, ar) - want))
    passed = origin_err < 1e-10 and worst < 1e-8
    return AcceptanceResult(
        7, "vacuum Wigner identities",
        passed,
        f"origin deviation {origin_err:.2e} (tolerance 1e-10), displaced-point "
        f"deviation {worst:.2e} over {len(points)} points (tolerance 1e-8)",
    )


# ---------------------------------------------------------------------------
# 8/9. tomography round trips on (|0> + |2>)/sqrt(2) x |0>


def _roundtrip_setup():
    modes = ModeParams(eta=0.23)
    p = BichromaticParams.symmetric(k=1, delta=0.02, omega=0.05, modes=modes)
    s = 2.0 ** -0.5
    config = HilbertConfig(n_max_c=16, n_max_r=2)
    rho = make_vib_state(StateSpec.superposition([(0, 0, s), (2, 0, s)]), config)
    alphas = tuple((complex(a), 0j) for a in np.linspace(0.0, 1.0, 5))
    n_fit_c, n_fit_r = 14, 0
    taus = default_tau_grid(p, n_fit_c, n_fit_r)
    return p, rho, alphas, taus, n_fit_c, n_fit_r


def _roundtrip_errors(shots: int, seed: int):
    p, rho, alphas, taus, fc, fr = _roundtrip_setup()
    points = protocol_run(
        rho, alphas, taus, p, shots=shots, seed=seed, n_fit_c=fc, n_fit_r=fr
    )
    w_err = np.array(
        [pt.wigner.w - wigner_direct(rho, ac, ar) for pt, (ac, ar) in zip(points, alphas)]
    )
    p_err = max(
        float(np.max(np.abs(
            pt.estimate.pi - displace_vib(rho, ac, ar).populations()[: fc + 1, : fr + 1]
        )))
        for pt, (ac, ar) in zip(points, alphas)
    )
    return w_err, p_err


def check_roundtrip_noiseless(tol: float = 1e-6) -> AcceptanceResult:
    w_err, p_err = _roundtrip_errors(shots=0, seed=0)
    w_max = float(np.max(np.abs(w_err)))
    passed = w_max < tol and p_err < tol
    return AcceptanceResult(
        8, "noiseless tomography round trip",
        passed,
        f"max Wigner deviation {w_max:.2e}, max population deviation {p_err:.2e} "
        f"over a 5-point displacement line (tolerance {tol:.0e})",
    )


def check_roundtrip_shot_noise(seed: int = 1) -> AcceptanceResult:
    w1, p1 = _roundtrip_errors(shots=10_000, seed=seed)
    w4, _ = _roundtrip_errors(shots=40_000, seed=seed)
    w_max = float(np.max(np.abs(w1)))
    ratio = float(np.sqrt(np.mean(w1**2) / np.mean(w4**2)))
    passed = p1 <= 0.05 and w_max <= 0.08 and 1.6 <= ratio <= 2.6
    return AcceptanceResult(
        9, "shot-noise tomography round trip",
        passed,
        f"population error {p1:.4f} (<= 0.05), Wigner error {w_max:.4f} (<= 0.08), "
        f"RMS shrink {ratio:.2f}x on 4x shots (need 1.6..2.6), seed {seed}",
    )


# ---------------------------------------------------------------------------
# 10. CLI determinism


_DETERMINISM_CFG = """\
mode = tomo-synth
seed = 17
[hilbert]
n_max_c = 12
n_max_r = 3
[modes]
eta = 0.23
[drive]
k = 1
delta = 0.02
omega = 0.05
[state]
kind = thermal
nbar_c = 0.2
nbar_r = 0.0
[tomo]
shots = 3000
n_fit_c = 4
n_fit_r = 1
"""


def check_determinism() -> AcceptanceResult:
    from .cli import main  # deferred: cli imports this module for validate mode

    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "run.cfg")
        with open(cfg, "w", encoding="utf-8") as fh:
            fh.write(_DETERMINISM_CFG)
        out_a = os.path.join(tmp, "a")
        out_b = os.path.join(tmp, "b")
        code_a = main(["--config", cfg, "--out", out_a, "--quiet"])
        code_b = main(["--config", cfg, "--out", out_b, "--quiet"])
        names = sorted(os.listdir(out_a))
        match, mismatch, errors = filecmp.cmpfiles(out_a, out_b, names, shallow=False)
    passed = code_a == 0 and code_b == 0 and not mismatch and not errors and bool(match)
    return AcceptanceResult(
        10, "bitwise-deterministic reruns",
        passed,
        f"{len(match)} file(s) byte-identical across two runs"
        + (f", mismatched: {mismatch + errors}" if (mismatch or errors) else ""),
    )


# ---------------------------------------------------------------------------


_CHECKS = (
    check_closed_forms,
    check_decoupling,
    check_bell_effective,
    check_bell_exact,
    check_spectrum_grid,
    check_lamb_dicke,
    check_wigner_oracle,
    check_roundtrip_noiseless,
    check_roundtrip_shot_noise,
    check_determinism,
)


def run_all() -> list[AcceptanceResult]:
    """Run every acceptance check in order and collect the results."""
    return [check() for check in _CHECKS]


def main() -> int:  # pragma: no cover - thin convenience wrapper
    results = run_all()
    for res in results:
        print(res.report_line())
    return 0 if all(r.passed for r in results) else 3


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
