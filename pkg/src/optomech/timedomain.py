"""Time-domain engines.

Semiclassical stochastic integration of the two-mode nonlinear Langevin pair
(cavity amplitude a, mirror amplitude b), the explicit convolution solution of
the photon-number/cross-mode linear pair, and Welch PSD estimation used to
cross-validate the frequency-domain pipeline.

The integrator works in the frame rotating at the drive: the cavity detuning
enters as +i*Delta and the coherent drive as the constant -alpha. Operators
are replaced by complex amplitudes; quantum asymmetry enters only through the
effective noise occupations (1/2 optical, m_th + 1/2 mechanical), so the
spectra it produces carry the nonlinear frequency pull but symmetric sideband
weights. Only the independent components (a, b) are integrated; conjugate
series are implied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from .exceptions import BlowUpError, ValidationError
from .params import SystemParams
from . import _kernels

SCHEME = "exponential-stochastic-euler"

# Optical / mechanical effective occupations for classical noise sampling.
OPTICAL_OCCUPATION = 0.5


@dataclass
class Trajectory:
    """Uniformly sampled complex time series keyed by label.

    For stochastic runs the labels are "a", "b", "a_out"; the explicit
    linear solution uses "N", "B". Series are 1-D for a single trajectory,
    (n_samples, n_traj) otherwise. The seed is recorded so a run can be
    reproduced bit for bit.
    """

    t: np.ndarray
    series: dict = field(default_factory=dict)
    dt: float = 0.0
    steps: int = 0
    decimate: int = 1
    seed: object = None
    scheme: str = ""

    def __post_init__(self) -> None:
        n = self.t.shape[0]
        for label, arr in self.series.items():
            if arr.shape[0] != n:
                raise ValidationError(
                    f"series {label!r} length {arr.shape[0]} != t grid {n}")

    def __getitem__(self, label: str) -> np.ndarray:
        return self.series[label]

    @property
    def a(self) -> np.ndarray:
        return self.series["a"]

    @property
    def b(self) -> np.ndarray:
        return self.series["b"]

    @property
    def a_out(self) -> np.ndarray:
        return self.series["a_out"]


def classical_fixed_point(params: SystemParams, tol: float = 1e-13,
                          max_iter: int = 500) -> tuple[complex, complex]:
    """Self-consistent stationary point (a_bar, b_bar) of the noise-free
    semiclassical pair. Damped iteration on the photon number; converges on
    the branch continuously connected to the weak-coupling solution."""
    delta = params.bare_detuning()
    kappa, Omega, Gamma, g0 = params.kappa, params.Omega, params.Gamma, params.g0
    alpha = params.alpha
    n_bar = abs(alpha) ** 2 / (delta ** 2 + kappa ** 2 / 4.0)
    b_bar = 0.0j
    for _ in range(max_iter):
        b_bar = 1j * g0 * n_bar / (1j * Omega + Gamma / 2.0)
        shift = 2.0 * g0 * b_bar.real
        a_bar = alpha / (1j * (delta + shift) - kappa / 2.0)
        n_new = abs(a_bar) ** 2
        if abs(n_new - n_bar) <= tol * max(1.0, n_bar):
            n_bar = n_new
            break
        n_bar = 0.5 * (n_bar + n_new)
    b_bar = 1j * g0 * n_bar / (1j * Omega + Gamma / 2.0)
    a_bar = alpha / (1j * (delta + 2.0 * g0 * b_bar.real) - kappa / 2.0)
    return a_bar, b_bar


def default_timestep(params: SystemParams) -> float:
    """Step-size rule: resolve the mechanical period to 1%, the decay times
    to 10%, shrunk by the coupling-strength factor (1 + g0 sqrt(n) / Omega)."""
    a_bar, _ = classical_fixed_point(params)
    n_bar = abs(a_bar) ** 2
    base = min(0.01 / params.Omega, 0.1 / params.kappa, 0.1 / params.Gamma)
    return base / (1.0 + params.g0 * math.sqrt(n_bar) / params.Omega)


def _max_allowed_dt(params: SystemParams) -> float:
    delta = abs(params.bare_detuning())
    return min(0.01 / max(params.Omega, delta),
               0.1 / params.kappa, 0.1 / params.Gamma)


def integrate_semiclassical(params: SystemParams, T: float, dt: float | None = None,
                            seed: int | np.random.SeedSequence = 0, n_traj: int = 1,
                            decimate: int = 1, noise: bool = True,
                            a0: complex | None = None, b0: complex | None = None,
                            burn_in: float = 0.0) -> Trajectory:
    """Integrate the nonlinear pair da/dt = (i*Delta - kappa/2)a + 2i*g0*a*Re(b)
    - alpha + sqrt(kappa)*xi_a, db/dt = (-i*Omega - Gamma/2)b + i*g0*|a|^2
    + sqrt(Gamma)*xi_b with an exponential stochastic Euler step.

    Initial state defaults to the classical fixed point. Records block means
    of a, b and of the output field a_out = xi_a - sqrt(kappa)*a over
    `decimate` consecutive steps. `burn_in` seconds are integrated and
    discarded first. Identical (seed, dt, T, decimate, burn_in) give
    bit-identical results on a given kernel path; the numba and numpy paths
    agree to rounding (they order the arithmetic identically but may fuse
    multiply-adds differently). Trajectory j consumes the same noise stream
    regardless of n_traj.
    """
    if dt is None:
        dt = default_timestep(params)
    dt_cap = _max_allowed_dt(params) * (1.0 + 1e-9)
    if dt > dt_cap:
        raise ValidationError(f"dt={dt:g} exceeds resolution bound {dt_cap:g}")
    if noise and T < 100.0 * (2.0 * math.pi / params.Omega):
        raise ValidationError("noisy runs need T >= 100 mechanical periods")
    if n_traj < 1 or decimate < 1:
        raise ValidationError("n_traj and decimate must be >= 1")

    dec = int(decimate)
    nblocks = int(round(T / dt)) // dec
    if nblocks < 1:
        raise ValidationError("T too short for requested dt and decimation")
    steps = nblocks * dec
    burn_blocks = int(math.ceil(round(burn_in / dt) / dec)) if burn_in > 0 else 0

    delta = params.bare_detuning()
    kappa, Gamma, Omega, g0 = params.kappa, params.Gamma, params.Omega, params.g0
    lam_a = 1j * delta - kappa / 2.0
    lam_b = -1j * Omega - Gamma / 2.0
    ea = np.exp(lam_a * dt)
    eb = np.exp(lam_b * dt)
    phia = (ea - 1.0) / lam_a
    phib = (eb - 1.0) / lam_b
    sqk = math.sqrt(kappa)
    sqg = math.sqrt(Gamma)
    # per-quadrature standard deviations of the complex white inputs
    occ_b = params.m_th + 0.5
    std_a = math.sqrt(0.5 * OPTICAL_OCCUPATION / dt) if noise else 0.0
    std_b = math.sqrt(0.5 * occ_b / dt) if noise else 0.0

    if a0 is None or b0 is None:
        fa, fb = classical_fixed_point(params)
        a0 = fa if a0 is None else a0
        b0 = fb if b0 is None else b0
    a = np.full(n_traj, complex(a0), dtype=np.complex128)
    b = np.full(n_traj, complex(b0), dtype=np.complex128)

    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    gens = [np.random.Generator(np.random.PCG64(child)) for child in ss.spawn(n_traj)]

    chunk_blocks = max(1, 16384 // dec)
    out_a = np.empty((nblocks, n_traj), dtype=np.complex128)
    out_b = np.empty((nblocks, n_traj), dtype=np.complex128)
    out_ao = np.empty((nblocks, n_traj), dtype=np.complex128)

    done_blocks = -burn_blocks
    while done_blocks < nblocks:
        if done_blocks < 0:
            nb = min(chunk_blocks, -done_blocks)
        else:
            nb = min(chunk_blocks, nblocks - done_blocks)
        cs = nb * dec
        xia = np.empty((n_traj, cs), dtype=np.complex128)
        xib = np.empty((n_traj, cs), dtype=np.complex128)
        if noise:
            for j in range(n_traj):
                h = gens[j].standard_normal((4, cs))
                xia[j] = (h[0] + 1j * h[1]) * std_a
                xib[j] = (h[2] + 1j * h[3]) * std_b
        else:
            xia.fill(0.0)
            xib.fill(0.0)
        if done_blocks >= 0:
            va = out_a[done_blocks:done_blocks + nb]
            vb = out_b[done_blocks:done_blocks + nb]
            vo = out_ao[done_blocks:done_blocks + nb]
        else:
            va = np.empty((nb, n_traj), dtype=np.complex128)
            vb = np.empty_like(va)
            vo = np.empty_like(va)
        bad = _kernels.run_chunk(a, b, ea, phia, eb, phib, g0, complex(params.alpha),
                                 sqk, sqg, dt, xia, xib, dec, vo, va, vb)
        if bad >= 0:
            raise BlowUpError((done_blocks + burn_blocks) * dec + bad)
        done_blocks += nb

    t = (np.arange(nblocks) * dec + (dec - 1) / 2.0) * dt
    series = {"a": out_a, "b": out_b, "a_out": out_ao}
    if n_traj == 1:
        series = {k: v[:, 0] for k, v in series.items()}
    seed_record = ss.entropy if not ss.spawn_key else (ss.entropy, tuple(ss.spawn_key))
    return Trajectory(t=t, series=series, dt=dt, steps=steps, decimate=dec,
                      seed=seed_record, scheme=SCHEME)


def explicit_solution(params: SystemParams, N0: complex, B0: complex,
                      N_in: np.ndarray, B_in: np.ndarray, dt: float) -> Trajectory:
    """Closed-form convolution solution of the linear photon-number pair

        N(t) = N0 e^{-2 kappa t} - 2 sqrt(kappa) int e^{-2 kappa (t-s)} N_in(s) ds
        B(t) = B0 e^{-(i Omega + gamma/2) t}
               - int e^{-(i Omega + gamma/2)(t-s)} [i g0 N(s) + sqrt(gamma) B_in(s)] ds

    with gamma = kappa + Gamma, evaluated by trapezoidal convolution on the
    uniform input grid."""
    N_in = np.asarray(N_in, dtype=np.complex128)
    B_in = np.asarray(B_in, dtype=np.complex128)
    if N_in.shape != B_in.shape or N_in.ndim != 1:
        raise ValidationError("N_in and B_in must be equal-length 1-D series")
    kappa, Gamma, Omega, g0 = params.kappa, params.Gamma, params.Omega, params.g0
    gamma = kappa + Gamma

    def conv(decay: complex, forcing: np.ndarray, x0: complex) -> np.ndarray:
        E = np.exp(-decay * dt)
        u = 0.5 * dt * (E * forcing[:-1] + forcing[1:])
        tail, _ = scipy.signal.lfilter([1.0], [1.0, -E], u, zi=np.array([E * x0]))
        return np.concatenate(([x0], tail))

    N = conv(2.0 * kappa, -2.0 * math.sqrt(kappa) * N_in, complex(N0))
    B = conv(1j * Omega + gamma / 2.0,
             -(1j * g0 * N + math.sqrt(gamma) * B_in), complex(B0))
    t = np.arange(N_in.shape[0]) * dt
    return Trajectory(t=t, series={"N": N, "B": B}, dt=dt,
                      steps=N_in.shape[0] - 1, scheme="trapezoid-convolution")


def welch_psd(series: np.ndarray, dt: float, segment_len: int,
              overlap: float = 0.5, demean: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Averaged-periodogram PSD of a complex series, two-sided, on the signed
    angular grid (a tone e^{+i Omega t} peaks at w = +Omega). For 2-D input
    (n_samples, n_traj) the trajectory PSDs are averaged. Density scaling:
    white noise of per-sample variance s2 gives a flat level s2*dt."""
    series = np.asarray(series)
    if series.shape[0] < 4 * segment_len:
        raise ValidationError("series shorter than 4 Welch segments")
    if demean:
        series = series - series.mean(axis=0, keepdims=series.ndim > 1)
    f, psd = scipy.signal.welch(series, fs=1.0 / dt, window="hann",
                                nperseg=segment_len,
                                noverlap=int(round(overlap * segment_len)),
                                detrend=False, return_onesided=False,
                                scaling="density", axis=0)
    if psd.ndim > 1:
        psd = psd.mean(axis=tuple(range(1, psd.ndim)))
    w = 2.0 * math.pi * np.fft.fftshift(f)
    return w, np.fft.fftshift(psd)
