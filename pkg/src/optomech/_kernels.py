"""Stochastic integration kernels.

Two interchangeable implementations of the same chunk update: a numba @njit
kernel and a pure-numpy twin vectorized across trajectories. Selection order:
numba when importable, numpy otherwise; setting the environment variable
OPTOMECH_DISABLE_NUMBA to a non-empty value forces the numpy path.

The step is an exponential stochastic Euler: the stiff linear part of each
mode advances by its exact propagator, the nonlinear coupling enters through
the phi1 = (e^{lam dt} - 1)/lam factor, and the white noise enters as a
per-step impulse so the raw input samples stay aligned with the recorded
output a_out = a_in - sqrt(kappa) a.

State layout: 1-D complex arrays over trajectories. Noise layout:
(n_traj, n_steps) complex, one row per trajectory. Decimated records are
block means over `dec` consecutive steps, written as (n_blocks, n_traj).
"""

from __future__ import annotations

import os

import numpy as np

_BLOWUP_SQ = 1e200  # |a|^2 threshold treated as divergence

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    numba = None
    HAS_NUMBA = False


def use_numba() -> bool:
    """True when the numba kernel path is active for this process."""
    return HAS_NUMBA and not os.environ.get("OPTOMECH_DISABLE_NUMBA")


def _chunk_numpy(a, b, ea, phia, eb, phib, g0, alpha, sqk, sqg, dt,
                 xia, xib, dec, aout_dec, a_dec, b_dec):
    """Advance all trajectories through one chunk. Returns -1, or the step
    index (within the chunk) at which a blow-up was detected."""
    ntraj, nsteps = xia.shape
    nblocks = nsteps // dec
    noise_a = ea * sqk * dt
    noise_b = eb * sqg * dt
    inv = 1.0 / dec
    for blk in range(nblocks):
        so = np.zeros(ntraj, dtype=np.complex128)
        sa = np.zeros(ntraj, dtype=np.complex128)
        sb = np.zeros(ntraj, dtype=np.complex128)
        k0 = blk * dec
        for s in range(dec):
            x_a = xia[:, k0 + s]
            x_b = xib[:, k0 + s]
            so += x_a - sqk * a
            sa += a
            sb += b
            nla = (1j * g0) * a * (2.0 * b.real) - alpha
            nlb = (1j * g0) * (a.real * a.real + a.imag * a.imag)
            a = ea * a + phia * nla + noise_a * x_a
            b = eb * b + phib * nlb + noise_b * x_b
        aout_dec[blk] = so * inv
        a_dec[blk] = sa * inv
        b_dec[blk] = sb * inv
        mag = a.real * a.real + a.imag * a.imag
        if not np.all(np.isfinite(mag)) or np.any(mag > _BLOWUP_SQ):
            return k0 + dec - 1, a, b
    return -1, a, b


if HAS_NUMBA:

    @numba.njit(cache=True)
    def _chunk_numba(a, b, ea, phia, eb, phib, g0, alpha, sqk, sqg, dt,
                     xia, xib, dec, aout_dec, a_dec, b_dec):
        ntraj, nsteps = xia.shape
        nblocks = nsteps // dec
        noise_a = ea * sqk * dt
        noise_b = eb * sqg * dt
        inv = 1.0 / dec
        bad = -1
        for j in range(ntraj):
            aj = a[j]
            bj = b[j]
            k = 0
            for blk in range(nblocks):
                so = 0.0j
                sa = 0.0j
                sb = 0.0j
                for _ in range(dec):
                    x_a = xia[j, k]
                    x_b = xib[j, k]
                    so += x_a - sqk * aj
                    sa += aj
                    sb += bj
                    nla = (1j * g0) * aj * (2.0 * bj.real) - alpha
                    nlb = (1j * g0) * (aj.real * aj.real + aj.imag * aj.imag)
                    aj = ea * aj + phia * nla + noise_a * x_a
                    bj = eb * bj + phib * nlb + noise_b * x_b
                    k += 1
                    if aj.real * aj.real + aj.imag * aj.imag > _BLOWUP_SQ:
                        a[j] = aj
                        b[j] = bj
                        bad = k - 1
                        return bad
                aout_dec[blk, j] = so * inv
                a_dec[blk, j] = sa * inv
                b_dec[blk, j] = sb * inv
            a[j] = aj
            b[j] = bj
        return bad

else:  # pragma: no cover
    _chunk_numba = None


def run_chunk(a, b, ea, phia, eb, phib, g0, alpha, sqk, sqg, dt,
              xia, xib, dec, aout_dec, a_dec, b_dec):
    """Dispatch one chunk to the active kernel.

    Mutates a, b in place (trajectory state) and fills the *_dec buffers.
    Returns the blow-up step index within the chunk, or -1.
    """
    if use_numba():
        return _chunk_numba(a, b, ea, phia, eb, phib, g0, alpha, sqk, sqg, dt,
                            xia, xib, dec, aout_dec, a_dec, b_dec)
    bad, a_new, b_new = _chunk_numpy(a, b, ea, phia, eb, phib, g0, alpha, sqk,
                                     sqg, dt, xia, xib, dec, aout_dec, a_dec, b_dec)
    a[:] = a_new
    b[:] = b_new
    return bad
