"""Truncated two-mode Fock space for a pair of trapped ions.

Two ions share two collective vibrational modes: the center-of-mass (c.m.)
mode at the trap frequency (nu, our unit of frequency) and the stretch mode
at sqrt(3)*nu.  The joint Hilbert space is

    (4 electronic levels) x (n_max_c + 1) x (n_max_r + 1)

with basis ordering: electronic index slowest, then c.m. quantum number,
then stretch quantum number fastest (row-major).  Electronic levels are
indexed |dd> = 0, |du> = 1, |ud> = 2, |uu> = 3, where the first letter is
ion 1 ('d' = internal ground state, 'u' = excited).

Units: hbar = 1, frequencies in units of nu, times in 1/nu.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TruncationWarning",
    "STRETCH_FREQ_RATIO",
    "STRETCH_LD_RATIO",
    "ELEC_LABELS",
    "ModeParams",
    "HilbertConfig",
    "ModeOperators",
    "JointState",
    "VibDensity",
    "StateSpec",
    "laguerre",
    "laguerre_seq",
    "coupling_f",
    "coupling_f_grid",
    "destroy",
    "number_op",
    "mode_operators",
    "displacement",
    "thermal_weights",
    "make_vib_state",
    "basis_state",
    "fidelity",
    "reduce_electronic",
    "reduce_vibrational",
    "truncation_guard",
    "density_defects",
]

#: stretch-mode frequency in units of the c.m. frequency
STRETCH_FREQ_RATIO = np.sqrt(3.0)
#: stretch-mode Lamb-Dicke parameter in units of the c.m. one (3**-1/4)
STRETCH_LD_RATIO = 3.0 ** (-0.25)

ELEC_LABELS = ("dd", "du", "ud", "uu")

GUARD_TOL = 1e-6


class TruncationWarning(UserWarning):
    """A state carries non-negligible weight in the top Fock levels."""


# --------------------------------------------------------------------------
# polynomials and coupling amplitudes


def laguerre(n: int, k: int, x: float) -> float:
    """Associated Laguerre polynomial L_n^k(x) by the three-term recurrence.

    The upward recurrence in n is numerically stable for the small positive
    arguments (x = eta^2) used throughout; degree and order must be >= 0.
    """
    if n < 0 or k < 0:
        raise ValueError(f"laguerre degree/order must be >= 0, got n={n}, k={k}")
    if n == 0:
        return 1.0
    prev = 1.0
    cur = 1.0 + k - x
    for m in range(2, n + 1):
        prev, cur = cur, ((2 * m - 1 + k - x) * cur - (m - 1 + k) * prev) / m
    return cur


def laguerre_seq(n_max: int, k: int, x: float) -> np.ndarray:
    """L_n^k(x) for n = 0..n_max as an array (same recurrence as `laguerre`)."""
    if n_max < 0 or k < 0:
        raise ValueError(f"laguerre degree/order must be >= 0, got n_max={n_max}, k={k}")
    out = np.empty(n_max + 1)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 1.0 + k - x
    for m in range(2, n_max + 1):
        out[m] = ((2 * m - 1 + k - x) * out[m - 1] - (m - 1 + k) * out[m - 2]) / m
    return out


def _inv_rising(n: int, k: int) -> float:
    # n! / (n+k)!  as a running product, overflow-safe
    out = 1.0
    for j in range(1, k + 1):
        out /= n + j
    return out


# --------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class ModeParams:
    """Lamb-Dicke parameters of the two shared modes.

    `eta` is the c.m. Lamb-Dicke parameter; `eta_r` defaults to
    eta * 3**(-1/4), the stretch-mode value implied by the sqrt(3) frequency
    ratio.  `nu` is the c.m. trap frequency and fixes the unit system (leave
    at 1.0 unless you want outputs in other units).
    """

    eta: float
    eta_r: float | None = None
    nu: float = 1.0

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if self.nu <= 0:
            raise ValueError(f"nu must be > 0, got {self.nu}")
        if self.eta_r is None:
            object.__setattr__(self, "eta_r", self.eta * STRETCH_LD_RATIO)
        elif self.eta_r <= 0:
            raise ValueError(f"eta_r must be > 0, got {self.eta_r}")


def coupling_f(n_c: int, n_r: int, k: int, modes: ModeParams) -> float:
    """Sideband coupling amplitude f_k(n_c, n_r).

    Debye-Waller envelope times the k-th-sideband Laguerre factor of the
    c.m. mode and the zeroth-order (purely spectator) factor of the stretch
    mode:

        f_k = exp(-(eta^2 + eta_r^2)/2) * n_c!/(n_c+k)!
              * L_{n_c}^k(eta^2) * L_{n_r}^0(eta_r^2)

    The factorial ratio is deliberately un-square-rooted: the ladder
    operators that accompany f_k in the drive Hamiltonian supply the other
    half.
    """
    if n_c < 0 or n_r < 0:
        raise ValueError(f"Fock labels must be >= 0, got ({n_c}, {n_r})")
    if k < 0:
        raise ValueError(f"sideband order must be >= 0, got {k}")
    env = np.exp(-(modes.eta**2 + modes.eta_r**2) / 2.0)
    return (
        env
        * _inv_rising(n_c, k)
        * laguerre(n_c, k, modes.eta**2)
        * laguerre(n_r, 0, modes.eta_r**2)
    )


def coupling_f_grid(n_max_c: int, n_max_r: int, k: int, modes: ModeParams) -> np.ndarray:
    """f_k over the full grid, entry (n_c, n_r); bitwise equal to `coupling_f`."""
    return np.array(
        [
            [coupling_f(n_c, n_r, k, modes) for n_r in range(n_max_r + 1)]
            for n_c in range(n_max_c + 1)
        ]
    )


# --------------------------------------------------------------------------
# Hilbert space bookkeeping


@dataclass(frozen=True)
class HilbertConfig:
    """Truncation of the joint space (two qubits x two modes)."""

    n_max_c: int
    n_max_r: int

    def __post_init__(self):
        if self.n_max_c < 0 or self.n_max_r < 0:
            raise ValueError(
                f"truncations must be >= 0, got ({self.n_max_c}, {self.n_max_r})"
            )

    @property
    def dim_c(self) -> int:
        return self.n_max_c + 1

    @property
    def dim_r(self) -> int:
        return self.n_max_r + 1

    @property
    def dim_vib(self) -> int:
        return self.dim_c * self.dim_r

    @property
    def dim(self) -> int:
        return 4 * self.dim_vib

    def vib_index(self, n_c: int, n_r: int) -> int:
        if not (0 <= n_c <= self.n_max_c and 0 <= n_r <= self.n_max_r):
            raise ValueError(
                f"Fock labels ({n_c}, {n_r}) outside grid "
                f"({self.n_max_c}, {self.n_max_r})"
            )
        return n_c * self.dim_r + n_r

    def joint_index(self, elec: int | str, n_c: int, n_r: int) -> int:
        return self.elec_index(elec) * self.dim_vib + self.vib_index(n_c, n_r)

    @staticmethod
    def elec_index(elec: int | str) -> int:
        if isinstance(elec, str):
            try:
                return ELEC_LABELS.index(elec)
            except ValueError:
                raise ValueError(
                    f"electronic label must be one of {ELEC_LABELS}, got {elec!r}"
                ) from None
        if not 0 <= elec <= 3:
            raise ValueError(f"electronic index must be 0..3, got {elec}")
        return int(elec)


def destroy(dim: int) -> np.ndarray:
    """Single-mode annihilation operator on a `dim`-level truncation."""
    return np.diag(np.sqrt(np.arange(1.0, dim)), 1)


def number_op(dim: int) -> np.ndarray:
    return np.diag(np.arange(float(dim)))


@dataclass(frozen=True)
class ModeOperators:
    """Ladder and number operators of both modes, embedded in the joint space."""

    a: np.ndarray
    a_dag: np.ndarray
    n_c: np.ndarray
    b: np.ndarray
    b_dag: np.ndarray
    n_r: np.ndarray


def mode_operators(config: HilbertConfig) -> ModeOperators:
    """Joint-space ladder operators (identity on the electronic factor).

    On the truncated grid [a, a^dag] is the identity except for the
    -n_max entry in the top level; that defect is the price of the hard
    cutoff and is what the truncation guard watches for.
    """
    eye4 = np.eye(4)
    eye_c = np.eye(config.dim_c)
    eye_r = np.eye(config.dim_r)
    a1 = destroy(config.dim_c)
    b1 = destroy(config.dim_r)
    a = np.kron(eye4, np.kron(a1, eye_r))
    b = np.kron(eye4, np.kron(eye_c, b1))
    return ModeOperators(
        a=a,
        a_dag=a.conj().T,
        n_c=np.kron(eye4, np.kron(number_op(config.dim_c), eye_r)),
        b=b,
        b_dag=b.conj().T,
        n_r=np.kron(eye4, np.kron(eye_c, number_op(config.dim_r))),
    )


# --------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class JointState:
    """Pure state on the joint space (amplitude vector + its truncation)."""

    amps: np.ndarray
    config: HilbertConfig

    def __post_init__(self):
        if self.amps.shape != (self.config.dim,):
            raise ValueError(
                f"amplitude vector has shape {self.amps.shape}, "
                f"config wants ({self.config.dim},)"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def tensor(self) -> np.ndarray:
        """View as (4, dim_c, dim_r)."""
        return self.amps.reshape(4, self.config.dim_c, self.config.dim_r)

    def population(self, elec: int | str, n_c: int, n_r: int) -> float:
        return float(abs(self.amps[self.config.joint_index(elec, n_c, n_r)]) ** 2)


@dataclass(frozen=True)
class VibDensity:
    """Density matrix on the two-mode vibrational space alone.

    Valid instances are Hermitian, unit-trace and positive semidefinite up
    to numerical tolerance; `density_defects` reports how far a matrix is
    from that.  Off-diagonal coherences are allowed and are carried through
    displacement exactly; the tomography signal itself reads only the
    diagonal.
    """

    matrix: np.ndarray
    config: HilbertConfig

    def __post_init__(self):
        d = self.config.dim_vib
        if self.matrix.shape != (d, d):
            raise ValueError(
                f"density matrix has shape {self.matrix.shape}, config wants ({d}, {d})"
            )

    def populations(self) -> np.ndarray:
        """Fock populations as a real (dim_c, dim_r) grid."""
        return np.real(np.diag(self.matrix)).reshape(self.config.dim_c, self.config.dim_r)

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))


def density_defects(rho: VibDensity) -> dict:
    """Hermiticity / trace / positivity defects of a density matrix."""
    m = rho.matrix
    herm = float(np.max(np.abs(m - m.conj().T)))
    tr = abs(np.trace(m) - 1.0)
    lam_min = float(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2.0)))
    return {"hermiticity": herm, "trace_error": float(tr), "min_eigenvalue": lam_min}


# --------------------------------------------------------------------------
# displacement


def displacement(alpha: complex, mode: str, config: HilbertConfig) -> np.ndarray:
    """Displacement unitary exp(alpha a^dag - alpha* a) on one mode.

    Computed as the exact matrix exponential of the truncated generator
    (via Hermitian eigendecomposition), so the result is exactly unitary on
    the grid.  Large displacements relative to the truncation are flagged:
    |alpha|^2 > n_max/4 leaves too little headroom for the displaced
    populations to decay before the cutoff.
    """
    if mode == "c":
        dim, n_max = config.dim_c, config.n_max_c
    elif mode == "r":
        dim, n_max = config.dim_r, config.n_max_r
    else:
        raise ValueError(f"mode must be 'c' or 'r', got {mode!r}")
    if abs(alpha) ** 2 > n_max / 4.0:
        warnings.warn(
            f"displacement |alpha|^2 = {abs(alpha)**2:.3g} exceeds n_max/4 = "
            f"{n_max / 4.0:.3g} on mode {mode!r}; truncation artifacts likely",
            TruncationWarning,
            stacklevel=2,
        )
    a = destroy(dim)
    gen = alpha * a.conj().T - np.conj(alpha) * a  # anti-Hermitian
    h = 1j * gen  # Hermitian
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w)) @ v.conj().T


# --------------------------------------------------------------------------
# state constructors


def thermal_weights(nbar: float, dim: int) -> np.ndarray:
    """Geometric thermal weights nbar^n/(nbar+1)^(n+1), renormalized on the grid."""
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    if nbar == 0:
        w = np.zeros(dim)
        w[0] = 1.0
        return w
    n = np.arange(dim)
    w = nbar**n / (nbar + 1.0) ** (n + 1)
    return w / w.sum()


@dataclass(frozen=True)
class StateSpec:
    """Recipe for a vibrational state; see the classmethod constructors."""

    kind: str
    n_c: int = 0
    n_r: int = 0
    nbar_c: float = 0.0
    nbar_r: float = 0.0
    alpha_c: complex = 0.0
    alpha_r: complex = 0.0
    terms: tuple = field(default_factory=tuple)

    @classmethod
    def fock(cls, n_c: int, n_r: int) -> "StateSpec":
        return cls(kind="fock", n_c=n_c, n_r=n_r)

    @classmethod
    def thermal(cls, nbar_c: float, nbar_r: float) -> "StateSpec":
        return cls(kind="thermal", nbar_c=nbar_c, nbar_r=nbar_r)

    @classmethod
    def coherent(cls, alpha_c: complex, alpha_r: complex) -> "StateSpec":
        return cls(kind="coherent", alpha_c=alpha_c, alpha_r=alpha_r)

    @classmethod
    def superposition(cls, terms) -> "StateSpec":
        """terms: iterable of (n_c, n_r, amplitude); normalized on build."""
        return cls(kind="superposition", terms=tuple((int(a), int(b), complex(c)) for a, b, c in terms))


def make_vib_state(spec: StateSpec, config: HilbertConfig) -> VibDensity:
    """Build a vibrational density matrix from a recipe.

    Supports Fock products, two-mode thermal products (truncated geometric
    weights, renormalized), coherent products, and pure superpositions of
    Fock pairs.  The result passes through the truncation guard.
    """
    d = config.dim_vib
    if spec.kind == "fock":
        idx = config.vib_index(spec.n_c, spec.n_r)
        m = np.zeros((d, d), complex)
        m[idx, idx] = 1.0
        rho = VibDensity(m, config)
    elif spec.kind == "thermal":
        w = np.outer(
            thermal_weights(spec.nbar_c, config.dim_c),
            thermal_weights(spec.nbar_r, config.dim_r),
        ).reshape(d)
        rho = VibDensity(np.diag(w).astype(complex), config)
    elif spec.kind == "coherent":
        vec_c = displacement(spec.alpha_c, "c", config)[:, 0]
        vec_r = displacement(spec.alpha_r, "r", config)[:, 0]
        psi = np.kron(vec_c, vec_r)
        rho = VibDensity(np.outer(psi, psi.conj()), config)
    elif spec.kind == "superposition":
        psi = np.zeros(d, complex)
        for n_c, n_r, amp in spec.terms:
            psi[config.vib_index(n_c, n_r)] += amp
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise ValueError("superposition has zero norm")
        psi /= nrm
        rho = VibDensity(np.outer(psi, psi.conj()), config)
    else:
        raise ValueError(f"unknown state kind {spec.kind!r}")
    truncation_guard(rho)
    return rho


def make_vib_vector(spec: StateSpec, config: HilbertConfig) -> np.ndarray:
    """Pure vibrational state vector (length dim_vib) for a pure recipe.

    Thermal recipes are mixed and rejected; use make_vib_state for those.
    """
    if spec.kind == "thermal":
        raise ValueError("thermal states are mixed; no state vector exists")
    rho = make_vib_state(spec, config)
    idx = int(np.argmax(np.real(np.diag(rho.matrix))))
    vec = rho.matrix[:, idx]
    nrm = np.linalg.norm(vec)
    if nrm == 0:  # pragma: no cover - unreachable for the pure recipes above
        raise ValueError("state recipe produced an empty vector")
    vec = vec / nrm
    # fix the overall phase so the dominant amplitude is real positive
    vec = vec * np.exp(-1j * np.angle(vec[idx]))
    return vec


def basis_state(config: HilbertConfig, elec: int | str, n_c: int, n_r: int) -> JointState:
    """Joint basis ket |elec; n_c, n_r>."""
    amps = np.zeros(config.dim, complex)
    amps[config.joint_index(elec, n_c, n_r)] = 1.0
    return JointState(amps, config)


# --------------------------------------------------------------------------
# measures and reductions


def fidelity(state: JointState, target: JointState) -> float:
    """|<target|state>|^2 for pure joint states."""
    if state.config != target.config:
        raise ValueError(
            f"state truncations differ: {state.config} vs {target.config}"
        )
    return float(abs(np.vdot(target.amps, state.amps)) ** 2)


def reduce_electronic(state: JointState) -> np.ndarray:
    """Partial trace over both modes -> 4x4 electronic density matrix."""
    t = state.tensor()
    return np.einsum("avw,bvw->ab", t, t.conj())


def reduce_vibrational(state: JointState) -> VibDensity:
    """Partial trace over the electronic factor -> two-mode density matrix."""
    t = state.amps.reshape(4, state.config.dim_vib)
    return VibDensity(np.einsum("av,aw->vw", t, t.conj()), state.config)


def _mode_populations(obj: JointState | VibDensity) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(obj, JointState):
        p = np.abs(obj.tensor()) ** 2
        return p.sum(axis=(0, 2)), p.sum(axis=(0, 1))
    grid = obj.populations()
    return grid.sum(axis=1), grid.sum(axis=0)


def truncation_guard(obj: JointState | VibDensity, tol: float = GUARD_TOL) -> float:
    """Warn when the top two Fock levels of either mode carry weight > tol.

    Returns the worst offending occupancy.  Grids with fewer than three
    levels on a mode are skipped: there is no headroom to certify there.
    """
    pc, pr = _mode_populations(obj)
    worst = 0.0
    for name, p in (("c.m.", pc), ("stretch", pr)):
        if p.size < 3:
            continue
        top = float(p[-2:].sum())
        worst = max(worst, top)
        if top > tol:
            warnings.warn(
                f"top-two Fock levels of the {name} mode hold population "
                f"{top:.3g} (> {tol:g}); enlarge the truncation",
                TruncationWarning,
                stacklevel=2,
            )
    return worst
