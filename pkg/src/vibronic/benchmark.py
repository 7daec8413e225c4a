"""Timing harness for the bichromatic propagation kernel.

Runs the same representative drive once per backend (compiled and pure
numpy), reports wall times and the speedup, and cross-checks that both
backends produce the same state vector.  Invoke as::

    python3 -m vibronic.benchmark [--t 600] [--dt-max 0.05] [--repeats 3]

The compiled path is warmed once before timing so JIT compilation is not
counted.  Setting VIBRONIC_FORCE_NUMPY=1 changes only the default used
by the library; the benchmark always asks for each backend explicitly.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels
from .dynamics import BichromaticAction, BichromaticParams
from .fockspace import HilbertConfig, ModeParams, basis_state


def _representative_action() -> tuple[BichromaticAction, np.ndarray]:
    p = BichromaticParams.symmetric(
        k=1, delta=0.12, omega=0.04, phi=0.3, phi0=0.7, modes=ModeParams(eta=0.15)
    )
    config = HilbertConfig(n_max_c=10, n_max_r=3)
    action = BichromaticAction(p, config)
    return action, basis_state(config, "dd", 0, 0).amps


def _time_backend(action, psi, t, dt_max, backend, repeats):
    best = np.inf
    out = None
    for _ in range(repeats):
        tic = time.perf_counter()
        out = action.propagate(psi, t, dt_max, backend=backend)
        best = min(best, time.perf_counter() - tic)
    return best, out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="time the propagation kernel backends")
    parser.add_argument("--t", type=float, default=600.0, help="evolution time in 1/nu units")
    parser.add_argument("--dt-max", type=float, default=0.05, help="largest midpoint step")
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats (best is kept)")
    args = parser.parse_args(argv)

    action, psi = _representative_action()
    n_steps = int(np.ceil(args.t / args.dt_max))
    print(f"joint dimension {psi.size}, {action.vals.size} stored couplings, {n_steps} steps")

    t_np, out_np = _time_backend(action, psi, args.t, args.dt_max, "numpy", args.repeats)
    print(f"numpy : {t_np:8.3f} s")

    if not _kernels.HAVE_NUMBA:
        print("numba : not installed; nothing to compare")
        return 0

    action.propagate(psi, args.dt_max, args.dt_max, backend="numba")  # trigger compilation
    t_nb, out_nb = _time_backend(action, psi, args.t, args.dt_max, "numba", args.repeats)
    dev = float(np.abs(out_np - out_nb).max())
    print(f"numba : {t_nb:8.3f} s   speedup {t_np / t_nb:5.1f}x   max state deviation {dev:.2e}")
    if dev > 1e-12:
        print("backends disagree beyond 1e-12; kernel bug")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
