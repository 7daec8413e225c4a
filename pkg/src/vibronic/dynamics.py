"""Drive Hamiltonians and propagators for the two-ion vibronic model.

Two laser configurations are covered:

* a bichromatic drive detuned by +delta from the k-th upper motional
  sideband of the centre-of-mass mode and by -delta' from the k'-th lower
  one.  Kept time dependent, it reads

      H(t) = M1 e^{i delta t} + M2 e^{-i delta' t} + h.c.

  with M1 = Omega e^{i phi} W (i eta)^k  adag^k F_k  and
  M2 = Omega e^{i phi} W (i eta)^{k'} F_{k'} a^{k'}, where
  W = S+_1 e^{i phi0/2} + S+_2 e^{-i phi0/2} acts on the electronic pair
  and F_k is the diagonal vibrational coupling (see fockspace.coupling_f).
  The stretch-mode Fock number is exactly conserved by this drive.

* the same pair of beams tuned on the carrier (no sideband), giving the
  time-independent H = kron(C + C^dag, diag(|Omega| f_0)) with
  C = |Omega| e^{i phi_eff} W.

For the symmetric dispersive case (k = k', delta = delta', |delta| large
against the sideband couplings) the second-order effective Hamiltonian
couples |dd> <-> |uu> and |du> <-> |ud| with vibrational-state-dependent
rates Omega^k_{n_c,n_r}; both the effective generator and the resulting
closed-form amplitudes are provided and are exact for either sign of delta.

Complex Omega is allowed everywhere: only |Omega| and the effective phase
phi_eff = phi + arg(Omega) enter the physics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .fockspace import (
    HilbertConfig,
    JointState,
    ModeParams,
    coupling_f,
    coupling_f_grid,
    destroy,
)


class RotatingWaveWarning(UserWarning):
    """Drive detuning large enough to strain the single-sideband picture."""


class AdiabaticityWarning(UserWarning):
    """Dispersive-elimination premise |delta| >> coupling is marginal."""


class ConvergenceWarning(UserWarning):
    """Step-halving check of the time-dependent propagator failed."""


_RW_FRACTION = 0.2  # |delta| / nu beyond which the sideband picture degrades


def _check_int(name: str, value) -> int:
    if value != int(value) or value < 0:
        raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class BichromaticParams:
    """Two-beam drive: k-th upper sideband at +delta, k'-th lower at -delta'.

    Frequencies are in units of the c.m. trap frequency ``modes.nu`` and the
    drive strength ``omega`` may be complex.
    """

    k: int
    k_prime: int
    delta: float
    delta_prime: float
    omega: complex
    phi: float
    phi0: float
    modes: ModeParams = field(default_factory=ModeParams)

    def __post_init__(self):
        object.__setattr__(self, "k", _check_int("k", self.k))
        object.__setattr__(self, "k_prime", _check_int("k_prime", self.k_prime))
        object.__setattr__(self, "omega", complex(self.omega))
        worst = max(abs(self.delta), abs(self.delta_prime))
        if worst > _RW_FRACTION * self.modes.nu:
            warnings.warn(
                f"detuning {worst:g} exceeds {_RW_FRACTION:g} nu; the "
                "single-sideband rotating-wave form is getting inaccurate",
                RotatingWaveWarning,
                stacklevel=2,
            )

    @classmethod
    def symmetric(cls, k, delta, omega, phi=0.0, phi0=0.0, modes=None):
        """Same sideband order and detuning on both beams (the Bell-state case)."""
        return cls(
            k=k,
            k_prime=k,
            delta=delta,
            delta_prime=delta,
            omega=omega,
            phi=phi,
            phi0=phi0,
            modes=modes if modes is not None else ModeParams(),
        )

    @property
    def symmetric_drive(self) -> bool:
        return self.k == self.k_prime and self.delta == self.delta_prime

    @property
    def phi_eff(self) -> float:
        """phi + arg(omega): the only phase combination the dynamics sees."""
        return self.phi + float(np.angle(self.omega))


@dataclass(frozen=True)
class CarrierParams:
    """Carrier pulse of the same beam pair: strength, common and relative phase."""

    omega: complex
    varphi: float
    varphi0: float
    modes: ModeParams = field(default_factory=ModeParams)

    def __post_init__(self):
        object.__setattr__(self, "omega", complex(self.omega))

    @property
    def phi_eff(self) -> float:
        return self.varphi + float(np.angle(self.omega))


# ---------------------------------------------------------------------------
# electronic-pair building blocks (basis order dd, du, ud, uu)
# ---------------------------------------------------------------------------

_SP1 = np.zeros((4, 4))  # raise ion 1: dd->ud, du->uu
_SP1[2, 0] = 1.0
_SP1[3, 1] = 1.0
_SP2 = np.zeros((4, 4))  # raise ion 2: dd->du, ud->uu
_SP2[1, 0] = 1.0
_SP2[3, 2] = 1.0


def _pair_raise(phi0: float) -> np.ndarray:
    return _SP1 * np.exp(0.5j * phi0) + _SP2 * np.exp(-0.5j * phi0)


def omega_k_scale(k: int, omega: complex, delta: float, eta: float) -> float:
    """Overall dispersive Rabi scale 2 |omega|^2 (i eta)^{2k} / delta (real).

    The (i eta)^{2k} factor is folded to (-1)^k eta^{2k}, so the result is a
    signed real number; delta = 0 is singular and rejected.
    """
    if delta == 0:
        raise ValueError("delta = 0: the dispersive scale 2|omega|^2 eta^2k / delta diverges")
    k = _check_int("k", k)
    return 2.0 * abs(omega) ** 2 * (-1.0) ** k * eta ** (2 * k) / delta


def _number_bracket(n: int, k: int) -> float:
    """n!/(n-k)! - (n+k)!/n!  (first term absent when n < k)."""
    first = 0.0 if n < k else float(math.perm(n, k))
    return first - float(math.perm(n + k, k))


def rabi_effective(n_c: int, n_r: int, p: BichromaticParams) -> float:
    """Vibrational-state-dependent dispersive rate Omega^k_{n_c, n_r} (signed)."""
    if not p.symmetric_drive:
        raise ValueError("effective rates assume k == k' and delta == delta'")
    scale = omega_k_scale(p.k, p.omega, p.delta, p.modes.eta)
    f = coupling_f(n_c, n_r, p.k, p.modes)
    return scale * f * f * _number_bracket(n_c, p.k)


@dataclass(frozen=True)
class RabiSpectrum:
    """Grid of dispersive rates Omega^k_{n_c, n_r} over a truncated Fock box."""

    values: np.ndarray  # (n_max_c + 1, n_max_r + 1), signed reals
    params: BichromaticParams

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    def min_relative_gap(self) -> float:
        """Smallest relative spacing of the distinct |Omega^k| values.

        Drives how well populations can be told apart from a time signal:
        near-degenerate rates make the inversion ill-conditioned.
        """
        mags = np.unique(self.magnitudes().ravel())
        if mags.size < 2:
            return 0.0
        gaps = np.diff(mags)
        ref = mags[1:]
        return float(np.min(gaps / np.where(ref > 0, ref, 1.0)))


def rabi_spectrum(p: BichromaticParams, n_max_c: int, n_max_r: int) -> RabiSpectrum:
    vals = np.empty((n_max_c + 1, n_max_r + 1))
    for n_c in range(n_max_c + 1):
        for n_r in range(n_max_r + 1):
            vals[n_c, n_r] = rabi_effective(n_c, n_r, p)
    return RabiSpectrum(values=vals, params=p)


# ---------------------------------------------------------------------------
# Hamiltonian builders
# ---------------------------------------------------------------------------


def _drive_blocks(p: BichromaticParams, config: HilbertConfig):
    """Dense M1 (upper-sideband term) and M2 (lower) on the joint space."""
    eta = p.modes.eta
    wmat = p.omega * np.exp(1j * p.phi) * _pair_raise(p.phi0)
    a_c = destroy(config.dim_c)
    eye_r = np.eye(config.dim_r)
    up_k = np.linalg.matrix_power(a_c.conj().T, p.k)
    dn_k = np.linalg.matrix_power(a_c, p.k_prime)
    f_up = np.diag(coupling_f_grid(config.n_max_c, config.n_max_r, p.k, p.modes).ravel())
    f_dn = np.diag(coupling_f_grid(config.n_max_c, config.n_max_r, p.k_prime, p.modes).ravel())
    g1 = (1j * eta) ** p.k * np.kron(up_k, eye_r) @ f_up
    g2 = (1j * eta) ** p.k_prime * f_dn @ np.kron(dn_k, eye_r)
    return np.kron(wmat, g1), np.kron(wmat, g2)


def build_bichromatic_H(t: float, p: BichromaticParams, config: HilbertConfig) -> np.ndarray:
    """Instantaneous dense H(t) of the bichromatic drive (for checks and
    the generic integrator; the long-time path uses BichromaticAction)."""
    m1, m2 = _drive_blocks(p, config)
    h = m1 * np.exp(1j * p.delta * t) + m2 * np.exp(-1j * p.delta_prime * t)
    return h + h.conj().T


class BichromaticAction:
    """Sparse COO form of the bichromatic drive for the stepping kernel.

    Entries are tagged with a phase group g in {0,1,2,3} selecting the
    coefficient [e^{i delta t}, e^{-i delta' t}, e^{-i delta t},
    e^{+i delta' t}] applied at each midpoint time.
    """

    def __init__(self, p: BichromaticParams, config: HilbertConfig):
        self.params = p
        self.config = config
        m1, m2 = _drive_blocks(p, config)
        rows, cols, vals, groups = [], [], [], []
        for g, mat in enumerate((m1, m2, m1.conj().T, m2.conj().T)):
            r, c = np.nonzero(mat)
            rows.append(r)
            cols.append(c)
            vals.append(mat[r, c])
            groups.append(np.full(r.size, g, dtype=np.int64))
        self.rows = np.concatenate(rows)
        self.cols = np.concatenate(cols)
        self.vals = np.concatenate(vals).astype(np.complex128)
        self.groups = np.concatenate(groups)
        # cheap uniform-in-time bound ||H(t)|| <= sqrt(||.||_1 ||.||_inf) summed
        bound = 0.0
        for mat in (m1, m2):
            am = np.abs(mat)
            bound += 2.0 * math.sqrt(am.sum(axis=0).max() * am.sum(axis=1).max())
        self.norm_bound = bound

    def hamiltonian(self, t: float) -> np.ndarray:
        return build_bichromatic_H(t, self.params, self.config)

    def propagate(self, psi: np.ndarray, t: float, dt_max: float, tol: float = 1e-15, backend=None) -> np.ndarray:
        if t == 0:
            return psi.astype(np.complex128, copy=True)
        n_steps = max(1, int(math.ceil(abs(t) / dt_max)))
        dt = t / n_steps
        m_sub = max(1, int(math.ceil(abs(dt) * self.norm_bound / 0.9)))
        return _kernels.propagate_coo(
            self.rows,
            self.cols,
            self.vals,
            self.groups,
            self.params.delta,
            self.params.delta_prime,
            psi,
            dt,
            n_steps,
            m_sub,
            tol=tol,
            backend=backend,
        )


def build_effective_H(p: BichromaticParams, config: HilbertConfig) -> np.ndarray:
    """Second-order dispersive Hamiltonian kron(E + E^dag, diag(A)).

    E = e^{2i phi_eff} |uu><dd| + (-1)^k (e^{i phi0} |ud><du| + 1/2) and
    A_{n_c,n_r} = Omega_k f_k(n_c,n_r)^2 [n_c!/(n_c-k)! - (n_c+k)!/n_c!].
    Valid when |delta| dominates every sideband coupling in the truncated
    box; a marginal ratio triggers AdiabaticityWarning.
    """
    if not p.symmetric_drive:
        raise ValueError("effective Hamiltonian assumes k == k' and delta == delta'")
    scale = omega_k_scale(p.k, p.omega, p.delta, p.modes.eta)
    fgrid = coupling_f_grid(config.n_max_c, config.n_max_r, p.k, p.modes)
    bracket = np.array([_number_bracket(n, p.k) for n in range(config.n_max_c + 1)])
    avals = (scale * fgrid * fgrid * bracket[:, None]).ravel()

    couple = (p.modes.eta ** p.k) * abs(p.omega) * np.abs(fgrid)
    worst = float(couple.max())
    if worst > 0 and abs(p.delta) < 10.0 * worst:
        warnings.warn(
            f"|delta| = {abs(p.delta):.3g} is only {abs(p.delta) / worst:.2f}x the "
            "largest sideband coupling; dispersive elimination is marginal",
            AdiabaticityWarning,
            stacklevel=2,
        )

    sgn = (-1.0) ** p.k
    e4 = np.zeros((4, 4), dtype=complex)
    e4[3, 0] = np.exp(2j * p.phi_eff)
    e4[2, 1] = sgn * np.exp(1j * p.phi0)
    e4 += sgn * 0.5 * np.eye(4)
    elec = e4 + e4.conj().T
    return np.kron(elec, np.diag(avals))


def build_carrier_H(p: CarrierParams, config: HilbertConfig) -> np.ndarray:
    """Carrier Hamiltonian kron(C + C^dag, diag(|omega| f_0))."""
    c4 = np.exp(1j * p.phi_eff) * _pair_raise(p.varphi0)
    f0 = abs(p.omega) * coupling_f_grid(config.n_max_c, config.n_max_r, 0, p.modes).ravel()
    return np.kron(c4 + c4.conj().T, np.diag(f0))


# ---------------------------------------------------------------------------
# propagators
# ---------------------------------------------------------------------------


class HermitianPropagator:
    """exp(-i H t) applier with the eigendecomposition done once.

    Rejects visibly non-Hermitian input (defect above 1e-10 relative).
    """

    def __init__(self, h: np.ndarray):
        defect = np.abs(h - h.conj().T).max()
        scale = max(1.0, np.abs(h).max())
        if defect > 1e-10 * scale:
            raise ValueError(f"matrix is not Hermitian (defect {defect:.3g})")
        self.eigvals, self.eigvecs = np.linalg.eigh(h)

    def apply(self, state: JointState, t: float) -> JointState:
        phases = np.exp(-1j * self.eigvals * t)
        amps = self.eigvecs @ (phases * (self.eigvecs.conj().T @ state.amps))
        return JointState(amps=amps, config=state.config)


def propagate_const(h: np.ndarray, state: JointState, t: float) -> JointState:
    """Evolve under a constant Hamiltonian for time t (exact, via eigh)."""
    return HermitianPropagator(h).apply(state, t)


def _expm_apply_dense(h: np.ndarray, psi: np.ndarray, dt: float, tol: float = 1e-15) -> np.ndarray:
    """exp(-i h dt) @ psi by scaled adaptive Taylor (dense helper)."""
    bound = float(np.abs(h).sum(axis=0).max()) * abs(dt)
    m = max(1, int(math.ceil(bound / 0.9)))
    dtau = dt / m
    out = psi.astype(np.complex128, copy=True)
    for _ in range(m):
        term = out.copy()
        thresh = tol * np.linalg.norm(out)
        j = 0
        while True:
            j += 1
            term = (-1j * dtau / j) * (h @ term)
            out = out + term
            if np.linalg.norm(term) <= thresh or j >= _kernels.MAX_TAYLOR_TERMS:
                break
    return out


def propagate_timedep(builder, state: JointState, t: float, dt_max: float, check_tol: float | None = None) -> JointState:
    """Midpoint-sampled evolution under H(t) = builder(t) (dense, generic).

    With check_tol set, the run is repeated at half the step and a
    ConvergenceWarning is raised when the two disagree beyond the tolerance.
    """
    if dt_max <= 0:
        raise ValueError("dt_max must be positive")

    def run(step_cap: float) -> np.ndarray:
        if t == 0:
            return state.amps.astype(np.complex128, copy=True)
        n = max(1, int(math.ceil(abs(t) / step_cap)))
        dt = t / n
        psi = state.amps
        for i in range(n):
            psi = _expm_apply_dense(builder((i + 0.5) * dt), psi, dt)
        return psi

    amps = run(dt_max)
    if check_tol is not None:
        diff = float(np.abs(amps - run(dt_max / 2)).max())
        if diff > check_tol:
            warnings.warn(
                f"halving the step changed the state by {diff:.3g} (> {check_tol:g}); "
                "reduce dt_max",
                ConvergenceWarning,
                stacklevel=2,
            )
    return JointState(amps=amps, config=state.config)


def propagate_bichromatic(
    p: BichromaticParams,
    config: HilbertConfig,
    state: JointState,
    t: float,
    dt_max: float = 0.05,
    check_tol: float | None = None,
    backend: str | None = None,
) -> JointState:
    """Evolve under the full time-dependent two-beam drive (sparse kernel)."""
    if dt_max <= 0:
        raise ValueError("dt_max must be positive")
    action = BichromaticAction(p, config)
    amps = action.propagate(state.amps, t, dt_max, backend=backend)
    if check_tol is not None:
        ref = action.propagate(state.amps, t, dt_max / 2, backend=backend)
        diff = float(np.abs(amps - ref).max())
        if diff > check_tol:
            warnings.warn(
                f"halving the step changed the state by {diff:.3g} (> {check_tol:g}); "
                "reduce dt_max",
                ConvergenceWarning,
                stacklevel=2,
            )
    return JointState(amps=amps, config=state.config)


# ---------------------------------------------------------------------------
# closed forms (exact solutions of the effective / carrier generators)
# ---------------------------------------------------------------------------


def closed_form_dispersive(n_c: int, n_r: int, p: BichromaticParams, t: float):
    """Amplitudes (a_dd, a_uu) of the dispersive two-photon flop from |dd>.

    Starting in |dd> x |n_c, n_r>:

        a_dd = e^{-i (-1)^k W t} cos(|W| t)
        a_uu = -i sgn(W) e^{2 i phi_eff} e^{-i (-1)^k W t} sin(|W| t)

    with W = Omega^k_{n_c, n_r} (signed).  Exact for the effective
    generator at either sign of delta.
    """
    w = rabi_effective(n_c, n_r, p)
    pref = np.exp(-1j * (-1.0) ** p.k * w * t)
    a_dd = pref * np.cos(abs(w) * t)
    a_uu = pref * (-1j) * np.sign(w) * np.exp(2j * p.phi_eff) * np.sin(abs(w) * t)
    return complex(a_dd), complex(a_uu)


def closed_form_carrier(sign: int, p: CarrierParams, n_c: int, n_r: int, t0: float) -> np.ndarray:
    """Electronic amplitudes after a carrier pulse of duration t0 applied to
    (|dd> + sign |uu>)/sqrt(2) sitting in the vibrational level |n_c, n_r>.

    Returns the length-4 vector (a_dd, a_du, a_ud, a_uu).  Exact: the
    carrier generator splits into independent rotations of the two spins.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    theta = abs(p.omega) * coupling_f(n_c, n_r, 0, p.modes) * t0
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    s_dbl = math.sin(2.0 * theta)
    ph = np.exp(1j * p.phi_eff)
    rt2 = math.sqrt(2.0)
    a_dd = (c2 - sign * s2 / ph**2) / rt2
    a_uu = (sign * c2 - s2 * ph**2) / rt2
    mid = (-0.5j) * s_dbl * (ph + sign / ph) / rt2
    a_ud = mid * np.exp(0.5j * p.varphi0)
    a_du = mid * np.exp(-0.5j * p.varphi0)
    return np.array([a_dd, a_du, a_ud, a_uu])


# ---------------------------------------------------------------------------
# sanity diagnostics
# ---------------------------------------------------------------------------


def resonance_guard(p: BichromaticParams) -> list[str]:
    """Warnings-as-text about parameter regimes that undermine the model.

    Checks the dispersive premise |delta| >> eta^k |Omega| f_k(0,0) and, for
    higher sidebands (k outside {0, 1}), accidental co-resonance of the
    drive with stretch-mode combination lines k nu - m sqrt(3) nu.
    """
    msgs: list[str] = []
    nu = p.modes.nu
    g00 = (p.modes.eta ** p.k) * abs(p.omega) * abs(coupling_f(0, 0, p.k, p.modes))
    if abs(p.delta) < 10.0 * g00:
        msgs.append(
            f"dispersive regime marginal: |delta| = {abs(p.delta):.4g} < 10 x "
            f"eta^k |Omega| f_k(0,0) = {10.0 * g00:.4g}"
        )
    if p.k not in (0, 1):
        w00 = abs(rabi_effective(0, 0, p)) if p.symmetric_drive else g00
        tol = 10.0 * w00
        for m in range(1, 2 * p.k + 1):
            miss = abs(p.k * nu - p.delta - m * math.sqrt(3.0) * nu)
            if miss < tol:
                msgs.append(
                    f"k={p.k} drive sits within {miss:.3g} of the stretch "
                    f"combination line m={m} (tolerance {tol:.3g})"
                )
    return msgs
