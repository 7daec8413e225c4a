"""Motional-state tomography from displaced flopping signals.

The measurement chain: coherently displace the two-mode vibrational state
(rho -> D_c^dag D_r^dag rho D_r D_c), drive the dispersive two-photon
transition for a range of durations tau, and record the probability of
finding both ions fluorescing,

    P_dd(tau) = sum_{n_c, n_r} cos^2(|Omega^k_{n_c n_r}| tau) Pi_{n_c n_r},

where Pi are the displaced Fock populations.  Because each Fock pair flops
at its own rate, the populations can be recovered from the signal; we do
that by non-negative least squares on the cos^2 design matrix (optionally
ridge-regularized for shot-noise records).  An alternating-sign sum of the
recovered populations then gives one point of the two-mode Wigner function

    W(alpha_c, alpha_r) = (4/pi^2) sum (-1)^{n_c+n_r} Pi_{n_c n_r}(-alpha_c, -alpha_r),

normalized so the vacuum origin reads 4/pi^2.  wigner_direct computes the
same value from the exact displaced state and serves as the oracle for the
full simulated protocol.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .dynamics import BichromaticParams, rabi_spectrum
from .fockspace import HilbertConfig, ModeParams, VibDensity, displacement

WIGNER_BOUND = 4.0 / math.pi**2

_FREQ_COLLISION_TOL = 1e-12
_COND_THRESHOLD = 1e8


class DegeneracyError(ValueError):
    """The measurement model cannot tell the fitted populations apart."""


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SignalRecord:
    """One P_dd(tau) measurement series and the drive that generated it.

    shots[j] = 0 marks an exact (noise-free) sample; otherwise p_dd[j] is a
    binomial count divided by shots[j].
    """

    taus: np.ndarray
    p_dd: np.ndarray
    shots: np.ndarray
    params: BichromaticParams
    seed: int

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float)
        p_dd = np.asarray(self.p_dd, dtype=float)
        shots = np.asarray(self.shots, dtype=int)
        if not (taus.shape == p_dd.shape == shots.shape) or taus.ndim != 1:
            raise ValueError("taus, p_dd and shots must be 1-d arrays of equal length")
        if taus.size > 1 and not np.all(np.diff(taus) > 0):
            raise DegeneracyError("taus must be strictly increasing (degenerate sampling grid)")
        if np.any((p_dd < 0) | (p_dd > 1)):
            raise ValueError("p_dd values must lie in [0, 1]")
        if np.any(shots < 0):
            raise ValueError("shots must be >= 0")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "p_dd", p_dd)
        object.__setattr__(self, "shots", shots)

    def to_text(self) -> str:
        p, m = self.params, self.params.modes
        lines = [
            f"# k = {p.k}",
            f"# k_prime = {p.k_prime}",
            f"# delta = {p.delta:.16e}",
            f"# delta_prime = {p.delta_prime:.16e}",
            f"# omega_re = {p.omega.real:.16e}",
            f"# omega_im = {p.omega.imag:.16e}",
            f"# phi = {p.phi:.16e}",
            f"# phi0 = {p.phi0:.16e}",
            f"# eta = {m.eta:.16e}",
            f"# eta_r = {m.eta_r:.16e}",
            f"# nu = {m.nu:.16e}",
            f"# seed = {self.seed}",
            "tau,p_dd,shots",
        ]
        for tau, pd, sh in zip(self.taus, self.p_dd, self.shots):
            lines.append(f"{tau:.16e},{pd:.16e},{sh}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SignalRecord":
        meta: dict[str, str] = {}
        rows: list[tuple[float, float, int]] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            if line.replace(" ", "") == "tau,p_dd,shots":
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"malformed sample row: {raw!r}")
            rows.append((float(parts[0]), float(parts[1]), int(parts[2])))
        try:
            modes = ModeParams(eta=float(meta["eta"]), eta_r=float(meta["eta_r"]), nu=float(meta["nu"]))
            params = BichromaticParams(
                k=int(meta["k"]),
                k_prime=int(meta["k_prime"]),
                delta=float(meta["delta"]),
                delta_prime=float(meta["delta_prime"]),
                omega=complex(float(meta["omega_re"]), float(meta["omega_im"])),
                phi=float(meta["phi"]),
                phi0=float(meta["phi0"]),
                modes=modes,
            )
            seed = int(meta["seed"])
        except KeyError as missing:
            raise ValueError(f"header is missing key {missing}") from None
        data = np.array(rows, dtype=float).reshape(-1, 3)
        return cls(taus=data[:, 0], p_dd=data[:, 1], shots=data[:, 2].astype(int), params=params, seed=seed)


@dataclass(frozen=True)
class PopulationEstimate:
    """Nonnegative displaced-population grid recovered from one record."""

    pi: np.ndarray  # (n_fit_c + 1, n_fit_r + 1)
    residual_norm: float
    condition_number: float

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        if np.any(pi < 0):
            raise ValueError("populations must be nonnegative")
        if pi.sum() > 1.0 + 1e-6:
            raise ValueError(f"populations sum to {pi.sum():.8f} > 1")
        object.__setattr__(self, "pi", pi)


@dataclass(frozen=True)
class WignerPoint:
    alpha_c: complex
    alpha_r: complex
    w: float

    def __post_init__(self):
        if abs(self.w) > WIGNER_BOUND + 1e-6:
            raise ValueError(f"|w| = {abs(self.w):.6f} exceeds the two-mode bound 4/pi^2")


@dataclass(frozen=True)
class ProtocolPoint:
    """One displacement point of the full protocol: Wigner value + fit."""

    wigner: WignerPoint
    estimate: PopulationEstimate


@dataclass(frozen=True)
class ConditionReport:
    """Identifiability diagnostics for a planned inversion."""

    min_relative_gap: float
    min_abs_gap: float
    condition_number: float
    recommended_span: float
    notes: tuple[str, ...]


# ---------------------------------------------------------------------------
# forward model
# ---------------------------------------------------------------------------


def _fit_frequencies(p: BichromaticParams, n_fit_c: int, n_fit_r: int) -> np.ndarray:
    return rabi_spectrum(p, n_fit_c, n_fit_r).magnitudes().ravel()


def design_matrix(freqs: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """cos^2(|Omega_i| tau_j) with one column per fitted Fock pair."""
    return np.cos(np.outer(np.asarray(taus, float), np.asarray(freqs, float))) ** 2


def displace_vib(rho: VibDensity, alpha_c: complex, alpha_r: complex) -> VibDensity:
    """D_c^dag(alpha_c) D_r^dag(alpha_r) rho D_r(alpha_r) D_c(alpha_c)."""
    u = np.kron(
        displacement(alpha_c, "c", rho.config),
        displacement(alpha_r, "r", rho.config),
    )
    return VibDensity(u.conj().T @ rho.matrix @ u, rho.config)


def synth_signal(
    rho: VibDensity,
    taus,
    p: BichromaticParams,
    shots: int = 0,
    seed: int = 0,
) -> SignalRecord:
    """Simulate the P_dd(tau) series for an (already displaced) state.

    shots = 0 returns the exact model values; shots > 0 replaces each
    sample with a binomial draw using an independent substream derived from
    (seed, sample index), so any sample can be regenerated in isolation.
    """
    if shots < 0:
        raise ValueError("shots must be >= 0")
    taus = np.asarray(taus, dtype=float)
    cfg = rho.config
    freqs = _fit_frequencies(p, cfg.n_max_c, cfg.n_max_r)
    probs = design_matrix(freqs, taus) @ rho.populations().ravel()
    probs = np.clip(probs, 0.0, 1.0)
    if shots == 0:
        return SignalRecord(taus=taus, p_dd=probs, shots=np.zeros(taus.size, int), params=p, seed=seed)
    drawn = np.empty(taus.size)
    for j, prob in enumerate(probs):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, j))))
        drawn[j] = rng.binomial(shots, prob) / shots
    return SignalRecord(taus=taus, p_dd=drawn, shots=np.full(taus.size, shots), params=p, seed=seed)


# ---------------------------------------------------------------------------
# inversion
# ---------------------------------------------------------------------------


def invert_populations(
    record: SignalRecord,
    n_fit_c: int,
    n_fit_r: int,
    ridge: float = 0.0,
) -> PopulationEstimate:
    """Recover displaced populations on the fit grid from one record.

    Solves min ||A x - p_dd|| subject to x >= 0 (scipy's active-set NNLS),
    optionally with a ridge term sqrt(ridge)||x|| appended; reports the
    unregularized residual and the condition number of the plain design.
    A solution summing above 1 is rescaled onto the probability simplex.
    """
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    shape = (n_fit_c + 1, n_fit_r + 1)
    freqs = _fit_frequencies(record.params, n_fit_c, n_fit_r)
    collisions = _frequency_collisions(freqs, shape)
    if collisions:
        raise DegeneracyError(
            "fit frequencies collide (within 1e-12) for Fock pairs: "
            + "; ".join(f"{a} ~ {b}" for a, b in collisions[:8])
        )
    n_unknown = freqs.size
    if record.taus.size < n_unknown:
        raise ValueError(f"{record.taus.size} samples cannot determine {n_unknown} populations")
    a = design_matrix(freqs, record.taus)
    cond = float(np.linalg.cond(a))
    if ridge > 0:
        a_solve = np.vstack([a, math.sqrt(ridge) * np.eye(n_unknown)])
        b_solve = np.concatenate([record.p_dd, np.zeros(n_unknown)])
    else:
        a_solve, b_solve = a, record.p_dd
    x, _ = nnls(a_solve, b_solve)
    total = x.sum()
    if total > 1.0:
        x = x / total
    residual = float(np.linalg.norm(a @ x - record.p_dd))
    return PopulationEstimate(pi=x.reshape(shape), residual_norm=residual, condition_number=cond)


def _frequency_collisions(freqs: np.ndarray, shape: tuple[int, int]):
    order = np.argsort(freqs)
    srt = freqs[order]
    out = []
    for i in np.nonzero(np.diff(srt) <= _FREQ_COLLISION_TOL)[0]:
        out.append(
            (
                tuple(int(v) for v in np.unravel_index(order[i], shape)),
                tuple(int(v) for v in np.unravel_index(order[i + 1], shape)),
            )
        )
    return out


# ---------------------------------------------------------------------------
# Wigner assembly
# ---------------------------------------------------------------------------


def _parity_signs(shape: tuple[int, int]) -> np.ndarray:
    nc, nr = np.indices(shape)
    return (-1.0) ** (nc + nr)


def wigner_from_populations(est: PopulationEstimate) -> float:
    """(4/pi^2) sum (-1)^{n_c+n_r} Pi over the fitted grid."""
    return float(WIGNER_BOUND * np.sum(_parity_signs(est.pi.shape) * est.pi))


def wigner_direct(rho: VibDensity, alpha_c: complex, alpha_r: complex) -> float:
    """Exact Wigner value of the truncated state at one phase-space point.

    Same alternating-parity sum as the measurement chain, but fed with the
    exact displaced populations; the oracle the simulated protocol is
    scored against.
    """
    pops = displace_vib(rho, alpha_c, alpha_r).populations()
    return float(WIGNER_BOUND * np.sum(_parity_signs(pops.shape) * pops))


# ---------------------------------------------------------------------------
# full protocol
# ---------------------------------------------------------------------------


def protocol_run(
    rho: VibDensity,
    alphas,
    taus,
    p: BichromaticParams,
    shots: int = 0,
    seed: int = 0,
    n_fit_c: int | None = None,
    n_fit_r: int | None = None,
    ridge: float = 0.0,
    workers: int = 1,
) -> list[ProtocolPoint]:
    """displace -> synthesize -> invert -> Wigner, per displacement point.

    Fit-grid sizes default to n_max - 2 per mode and may not exceed that
    (the topmost levels carry truncation error).  Each point uses the
    substream (seed, point index), so results are reproducible regardless
    of ``workers``.
    """
    cfg = rho.config
    if n_fit_c is None:
        n_fit_c = cfg.n_max_c - 2
    if n_fit_r is None:
        n_fit_r = cfg.n_max_r - 2
    if n_fit_c > cfg.n_max_c - 2 or n_fit_r > cfg.n_max_r - 2:
        raise ValueError(
            f"fit grid ({n_fit_c}, {n_fit_r}) too close to the truncation "
            f"({cfg.n_max_c}, {cfg.n_max_r}); keep n_fit <= n_max - 2"
        )
    if min(n_fit_c, n_fit_r) < 0:
        raise ValueError("fit grid must be nonnegative; enlarge the truncation")
    alphas = list(alphas)

    def one_point(idx: int) -> ProtocolPoint:
        alpha_c, alpha_r = alphas[idx]
        point_seed = int(np.random.SeedSequence((seed, idx)).generate_state(1)[0])
        displaced = displace_vib(rho, alpha_c, alpha_r)
        record = synth_signal(displaced, taus, p, shots=shots, seed=point_seed)
        est = invert_populations(record, n_fit_c, n_fit_r, ridge=ridge)
        w = wigner_from_populations(est)
        return ProtocolPoint(wigner=WignerPoint(alpha_c, alpha_r, w), estimate=est)

    if workers > 1 and len(alphas) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one_point, range(len(alphas))))
    return [one_point(i) for i in range(len(alphas))]


# ---------------------------------------------------------------------------
# planning diagnostics
# ---------------------------------------------------------------------------


def condition_report(p: BichromaticParams, n_fit_c: int, n_fit_r: int, taus) -> ConditionReport:
    """How identifiable the populations are for this drive and tau grid."""
    taus = np.asarray(taus, dtype=float)
    freqs = _fit_frequencies(p, n_fit_c, n_fit_r)
    srt = np.sort(freqs)
    diffs = np.diff(srt)
    if diffs.size == 0:
        min_abs = min_rel = 0.0
    else:
        min_abs = float(diffs.min())
        ref = np.where(srt[1:] > 0, srt[1:], 1.0)
        min_rel = float((diffs / ref).min())
    recommended = math.pi / min_abs if min_abs > 0 else math.inf
    cond = float(np.linalg.cond(design_matrix(freqs, taus))) if taus.size else math.inf
    notes = []
    if min_abs <= _FREQ_COLLISION_TOL:
        notes.append("fit frequencies are degenerate; populations on this grid are not identifiable")
    elif taus.size and taus.max() - taus.min() < recommended:
        notes.append(
            f"tau span {taus.max() - taus.min():.4g} is below the recommended "
            f"{recommended:.4g} (= pi / closest frequency gap); widen the scan"
        )
    if cond > _COND_THRESHOLD:
        notes.append(f"design matrix condition number {cond:.3g} exceeds {_COND_THRESHOLD:.0e}")
    return ConditionReport(
        min_relative_gap=min_rel,
        min_abs_gap=min_abs,
        condition_number=cond,
        recommended_span=recommended,
        notes=tuple(notes),
    )


def default_tau_grid(p: BichromaticParams, n_fit_c: int, n_fit_r: int) -> np.ndarray:
    """4 samples per unknown, spanning pi over the closest frequency gap."""
    freqs = _fit_frequencies(p, n_fit_c, n_fit_r)
    srt = np.sort(freqs)
    diffs = np.diff(srt)
    min_abs = float(diffs.min()) if diffs.size else 0.0
    if min_abs <= _FREQ_COLLISION_TOL:
        raise DegeneracyError("fit frequencies are degenerate; no finite tau span resolves them")
    return np.linspace(0.0, math.pi / min_abs, 4 * freqs.size)
