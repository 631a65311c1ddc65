"""Timing comparison of the two integration kernel paths.

The stochastic integrator dispatches each chunk either to the compiled
numba kernel or to its pure-numpy twin (forced by setting the environment
variable OPTOMECH_DISABLE_NUMBA). Both paths implement the identical
exponential stochastic Euler update; this script first checks they agree
on a short seeded run, then times a few workloads on each path and prints
the per-path step rates and the speedup.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --long   # heavier workloads
"""

import argparse
import os
import time

import numpy as np

from optomech import _kernels, timedomain
from optomech.params import SystemParams


PARAMS = SystemParams(omega=5.0, Omega=1.0, kappa=0.1, Gamma=1e-4, g0=1e-3,
                      drive_detuning=-1.0, alpha=10.0, m_th=1.0)


def _run(n_traj, T, seed=7):
    return timedomain.integrate_semiclassical(
        PARAMS, T=T, seed=seed, n_traj=n_traj, decimate=16)


def _time_path(disable_numba, n_traj, T, repeats):
    old = os.environ.pop("OPTOMECH_DISABLE_NUMBA", None)
    if disable_numba:
        os.environ["OPTOMECH_DISABLE_NUMBA"] = "1"
    try:
        best = min(_timed(n_traj, T) for _ in range(repeats))
    finally:
        os.environ.pop("OPTOMECH_DISABLE_NUMBA", None)
        if old is not None:
            os.environ["OPTOMECH_DISABLE_NUMBA"] = old
    return best


def _timed(n_traj, T):
    t0 = time.perf_counter()
    _run(n_traj, T)
    return time.perf_counter() - t0


def _check_agreement():
    tr_fast = _run(2, 700.0)
    os.environ["OPTOMECH_DISABLE_NUMBA"] = "1"
    try:
        tr_ref = _run(2, 700.0)
    finally:
        del os.environ["OPTOMECH_DISABLE_NUMBA"]
    for label in ("a", "b", "a_out"):
        if not np.allclose(tr_fast.series[label], tr_ref.series[label],
                           rtol=1e-12, atol=1e-12):
            raise SystemExit(f"kernel paths disagree on series {label!r}")
    print("agreement check: numba and numpy paths match to 1e-12")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--long", action="store_true",
                        help="heavier workloads (about ten times the steps)")
    parser.add_argument("--repeats", type=int, default=2,
                        help="timing repeats per cell, best is kept")
    args = parser.parse_args()

    if not _kernels.HAS_NUMBA:
        print("numba unavailable: both columns below run the numpy path")
    _run(2, 700.0)  # warm the compiled kernel before timing
    _check_agreement()

    T = 20_000.0 if args.long else 2_000.0
    print(f"\n{'n_traj':>6} {'steps':>10} {'numba':>10} {'numpy':>10} "
          f"{'speedup':>8}")
    for n_traj in (1, 8, 64):
        dt = timedomain.default_timestep(PARAMS)
        steps = n_traj * int(round(T / dt))
        t_numba = _time_path(False, n_traj, T, args.repeats)
        t_numpy = _time_path(True, n_traj, T, args.repeats)
        print(f"{n_traj:>6} {steps:>10} {t_numba:>9.3f}s {t_numpy:>9.3f}s "
              f"{t_numpy / t_numba:>7.1f}x")
    print(f"\nworkload: T={T:g}, decimate=16, thermal red-detuned point; "
          f"rates include per-chunk noise generation")


if __name__ == "__main__":
    main()
