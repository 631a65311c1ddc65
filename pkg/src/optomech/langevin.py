"""Linearized Langevin system builders.

Each builder assembles the drift matrix, decay matrix, input-noise
description, and drive vector of one operator-basis formulation:

- first_order:    {a, a*, b, b*}, rotating frame, detuning axis
- second_order:   {a, ab, ab*}, rotating frame, composite reduced basis
- minimal_fourth: {N, B} = {n^2, nb}, triangular 2x2
- quadratic:      {c, c*, n, d, d*, m}, absolute frame, shifted frequencies

The decay matrix `gamma` is stored as defined by each formulation (diagonal,
except the lower-triangular second-order one). `noise_feed` is the matrix
that multiplies the input vector in dA/dt = M A + noise_feed A_in - drive:
the elementwise square root for diagonal decay, the decay matrix itself for
the triangular second-order form, where the printed matrix is already the
input multiplier."""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateNoiseWarning, ValidationError
from .params import SystemParams, shifted_frequencies
from .steady import SteadyState, solve_cubic_steady, solve_quadratic_steady

_KINDS = ("first_order", "second_order", "minimal_fourth", "quadratic")


@dataclass(frozen=True, eq=False)
class LinearLangevinSystem:
    """Linear Langevin system dA/dt = M A + noise_feed A_in - drive.

    noise_psd_pos/noise_psd_neg give the input-noise spectral densities per
    channel for positive and negative frequencies (occupation numbers).
    frame is "detuning" (rotating frame, frequency axis w = omega_probe -
    omega_drive) or "absolute". meta carries builder-specific scalars such
    as the linearization point."""

    kind: str
    basis: tuple[str, ...]
    M: np.ndarray
    gamma: np.ndarray
    noise_feed: np.ndarray
    noise_psd_pos: np.ndarray
    noise_psd_neg: np.ndarray
    drive: np.ndarray
    input_labels: tuple[str, ...]
    frame: str
    degenerate_noise: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.basis)
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown system kind {self.kind!r}")
        for name in ("M", "gamma", "noise_feed"):
            mat = getattr(self, name)
            if mat.shape != (n, n):
                raise ValidationError(f"{name} must be {n}x{n}, got {mat.shape}")
        for name in ("noise_psd_pos", "noise_psd_neg", "drive"):
            vec = getattr(self, name)
            if vec.shape != (n,):
                raise ValidationError(f"{name} must have length {n}, got {vec.shape}")
        if len(self.input_labels) != n:
            raise ValidationError("one input label per basis element required")
        diag = np.diag(self.gamma)
        if np.any(diag.real < 0.0) or np.any(np.abs(diag.imag) > 0.0):
            raise ValidationError("decay matrix diagonal must be real non-negative")

    @property
    def dim(self) -> int:
        return len(self.basis)


def _diag_feed(rates) -> tuple[np.ndarray, np.ndarray]:
    gamma = np.diag(np.asarray(rates, dtype=np.complex128))
    return gamma, np.sqrt(gamma.real).astype(np.complex128)


def build_first_order(params: SystemParams,
                      steady: SteadyState | None = None) -> LinearLangevinSystem:
    """Linearized cubic-coupling system over {a, a*, b, b*}.

    The effective detuning includes the static pull f = 2 g0 Re[b_bar] and
    the light-motion coupling enters as g = g0 sqrt(n_bar), with the drive
    phase chosen so the mean field is real. Noise occupations are the
    thermal-bath values (1, 0, m_th+1, m_th) for w > 0 and conjugate-swapped
    for w < 0."""
    if steady is None:
        steady = solve_cubic_steady(params, params.alpha)
    n_bar = steady.n_bar
    g = params.g0 * math.sqrt(n_bar)
    dt_eff = params.bare_detuning() + steady.f
    kappa, Gamma, Omega = params.kappa, params.Gamma, params.Omega
    M = np.array([
        [1j * dt_eff - 0.5 * kappa, 0.0, 1j * g, 1j * g],
        [0.0, -1j * dt_eff - 0.5 * kappa, -1j * g, -1j * g],
        [1j * g, 1j * g, -1j * Omega - 0.5 * Gamma, 0.0],
        [-1j * g, -1j * g, 0.0, 1j * Omega - 0.5 * Gamma],
    ], dtype=np.complex128)
    gamma, feed = _diag_feed([kappa, kappa, Gamma, Gamma])
    m_th = params.m_th
    return LinearLangevinSystem(
        kind="first_order", basis=("a", "a_dag", "b", "b_dag"), M=M,
        gamma=gamma, noise_feed=feed,
        noise_psd_pos=np.array([1.0, 0.0, m_th + 1.0, m_th]),
        noise_psd_neg=np.array([0.0, 1.0, m_th, m_th + 1.0]),
        drive=np.array([params.alpha, np.conj(params.alpha), 0.0, 0.0],
                       dtype=np.complex128),
        input_labels=("a_in", "a_in_dag", "b_in", "b_in_dag"),
        frame="detuning",
        meta={"n_bar": n_bar, "g": g, "f": steady.f, "detuning_eff": dt_eff,
              "kappa": kappa, "Omega": Omega})


def build_second_order(params: SystemParams,
                       steady: SteadyState | None = None,
                       displacement_shift: bool = False) -> LinearLangevinSystem:
    """Composite reduced-basis system over {a, ab, ab*}.

    The composite rows damp at gamma/2 = (kappa+Gamma)/2 and couple through
    ig0 (m_bar+n_bar+1) and ig0 (m_bar-n_bar), with m_bar the coherent
    phonon population |b_bar|^2. The decay matrix is the lower-triangular
    input multiplier with entries kappa, kappa |b_bar|, Gamma sqrt(n_bar).

    displacement_shift=True keeps the mean-field image of the operator
    diagonal terms, adding +i g0 b_bar and +i g0 conj(b_bar) to the
    composite diagonals; this variant translates both composite resonances
    by g0 Re[b_bar] and is the frequency-domain route to the sideband
    inequivalence. The default drops those terms."""
    if steady is None:
        steady = solve_cubic_steady(params, params.alpha)
    n_bar, m_bar, b_bar = steady.n_bar, steady.m_bar, steady.b_bar
    delta = params.bare_detuning()
    kappa, Gamma, Omega = params.kappa, params.Gamma, params.Omega
    g0 = params.g0
    gam = kappa + Gamma
    M = np.array([
        [1j * delta - 0.5 * kappa, 1j * g0, 1j * g0],
        [1j * g0 * (m_bar + n_bar + 1.0), -1j * (Omega - delta) - 0.5 * gam, 0.0],
        [1j * g0 * (m_bar - n_bar), 0.0, 1j * (Omega + delta) - 0.5 * gam],
    ], dtype=np.complex128)
    if displacement_shift:
        M[1, 1] += 1j * g0 * b_bar
        M[2, 2] += 1j * g0 * np.conj(b_bar)
    gamma = np.array([
        [kappa, 0.0, 0.0],
        [kappa * abs(b_bar), Gamma * math.sqrt(n_bar), 0.0],
        [kappa * abs(b_bar), 0.0, Gamma * math.sqrt(n_bar)],
    ], dtype=np.complex128)
    m_th = params.m_th
    degenerate = n_bar == 0.0
    if degenerate:
        warnings.warn("n_bar = 0 makes the composite noise rows vanish",
                      DegenerateNoiseWarning, stacklevel=2)
    return LinearLangevinSystem(
        kind="second_order", basis=("a", "ab", "ab_dag"), M=M,
        gamma=gamma, noise_feed=gamma.copy(),
        noise_psd_pos=np.array([1.0, m_th + 1.0, m_th]),
        noise_psd_neg=np.array([0.0, m_th, m_th + 1.0]),
        drive=np.array([params.alpha, 0.0, 0.0], dtype=np.complex128),
        input_labels=("a_in", "b_in", "b_in_dag"),
        frame="detuning", degenerate_noise=degenerate,
        meta={"n_bar": n_bar, "m_bar": m_bar, "b_bar": b_bar,
              "displacement_shift": displacement_shift,
              "kappa": kappa, "Omega": Omega})


def build_minimal_fourth(params: SystemParams,
                         steady: SteadyState | None = None) -> LinearLangevinSystem:
    """Minimal closed pair {N, B} = {n^2, nb}: triangular 2x2 drift.

    Input and drive vectors are the strong-field approximations around the
    cubic steady state: drive = 2 sqrt(n_bar) {n_bar, b_bar} Re[alpha], and
    the effective input occupations combine the optical channel (weight
    kappa/gamma) with the thermal mechanical channel (weight Gamma/gamma)."""
    if steady is None:
        steady = solve_cubic_steady(params, params.alpha)
    n_bar, b_bar = steady.n_bar, steady.b_bar
    kappa, Gamma, Omega = params.kappa, params.Gamma, params.Omega
    gam = kappa + Gamma
    M = np.array([
        [-2.0 * kappa, 0.0],
        [1j * params.g0, -1j * Omega - 0.5 * gam],
    ], dtype=np.complex128)
    gamma, feed = _diag_feed([2.0 * kappa, gam])
    m_th = params.m_th
    optical = (kappa / gam) * n_bar * abs(b_bar) ** 2
    mechanical = (Gamma / gam) * n_bar**2
    re_alpha = complex(params.alpha).real
    return LinearLangevinSystem(
        kind="minimal_fourth", basis=("N", "B"), M=M, gamma=gamma,
        noise_feed=feed,
        noise_psd_pos=np.array([n_bar**3 / 4.0, optical + mechanical * (m_th + 1.0)]),
        noise_psd_neg=np.array([n_bar**3 / 4.0, optical + mechanical * m_th]),
        drive=2.0 * math.sqrt(n_bar) * re_alpha * np.array([n_bar, b_bar],
                                                           dtype=np.complex128),
        input_labels=("N_in", "B_in"), frame="detuning",
        meta={"n_bar": n_bar, "b_bar": b_bar, "kappa": kappa, "Omega": Omega})


def build_quadratic(params: SystemParams,
                    steady: SteadyState | None = None) -> LinearLangevinSystem:
    """Quadratic-regime system over {c, c*, n, d, d*, m} in the absolute frame.

    Frequencies are the interaction-shifted values (omega + g1 - 2 g2,
    Omega - 2 g2); the drive is assumed resonant with the shifted optical
    frequency and enters only through the steady state, so the drive vector
    is zero. The two quadratic rates appear through the exact combinations
    g1 + g2 and g1 - g2, which keeps g2 = 0 well defined. Decay rates scale
    with the mean fields (n_bar kappa and 2 |d_bar| Gamma families); a
    vanishing mean field degenerates those noise rows, which is flagged and
    warned but still returns the system."""
    if steady is None:
        steady = solve_quadratic_steady(params, params.alpha)
    w_eff, W_eff = shifted_frequencies(params)
    n_bar, m_bar, d_bar = steady.n_bar, steady.m_bar, steady.d_bar
    kappa, Gamma = params.kappa, params.Gamma
    g2 = params.g2
    gp = params.g1 + params.g2
    gm = params.g1 - params.g2

    la = 2j * (w_eff - gp * m_bar)
    aa = np.array([
        [la - kappa, 0.0, -0.5j * g2 * m_bar],
        [0.0, -la - kappa, 0.5j * g2 * m_bar],
        [1j * g2 * m_bar, -1j * g2 * m_bar, -kappa],
    ], dtype=np.complex128)
    ab = 0.5j * g2 * (n_bar + 0.5) * np.array([
        [1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
        [0.0, 0.0, 0.0],
    ], dtype=np.complex128)
    ba = 1j * (m_bar + 0.5) * np.array([
        [g2, g2, -gm],
        [-g2, -g2, gm],
        [0.0, 0.0, 0.0],
    ], dtype=np.complex128)
    lb = 2j * (W_eff + gp * n_bar)
    bb = np.array([
        [-lb - Gamma, 0.0, -1j * gm * n_bar],
        [0.0, lb - Gamma, 1j * gm * n_bar],
        [2j * gm * n_bar, -2j * gm * n_bar, -Gamma],
    ], dtype=np.complex128)
    M = np.block([[aa, ab], [ba, bb]])

    d_mag = abs(d_bar)
    gamma, feed = _diag_feed([n_bar * kappa, n_bar * kappa, 4.0 * n_bar * kappa,
                              2.0 * d_mag * Gamma, 2.0 * d_mag * Gamma,
                              4.0 * d_mag * Gamma])
    degenerate = n_bar == 0.0 or d_mag == 0.0
    if degenerate:
        warnings.warn("vanishing mean field zeroes quadratic noise rows "
                      f"(n_bar={n_bar!r}, |d_bar|={d_mag!r})",
                      DegenerateNoiseWarning, stacklevel=2)
    m_th = params.m_th
    return LinearLangevinSystem(
        kind="quadratic", basis=("c", "c_dag", "n", "d", "d_dag", "m"), M=M,
        gamma=gamma, noise_feed=feed,
        noise_psd_pos=np.array([1.0, 0.0, 0.25, m_th + 1.0, m_th,
                                0.25 * (2.0 * m_th + 1.0)]),
        noise_psd_neg=np.array([0.0, 1.0, 0.25, m_th, m_th + 1.0,
                                0.25 * (2.0 * m_th + 1.0)]),
        drive=np.zeros(6, dtype=np.complex128),
        input_labels=("a_in", "a_in_dag", "a_in_sym",
                      "b_in", "b_in_dag", "b_in_sym"),
        frame="absolute", degenerate_noise=degenerate,
        meta={"n_bar": n_bar, "m_bar": m_bar, "d_bar": d_bar,
              "omega_shifted": w_eff, "Omega_shifted": W_eff,
              "omega_bare": params.omega, "Omega_bare": params.Omega,
              "kappa": kappa, "Omega": W_eff})


def apply_optomech_perturbation(system: LinearLangevinSystem,
                                params: SystemParams, steady: SteadyState,
                                g0: float | None = None) -> LinearLangevinSystem:
    """Add the linearized cubic-coupling correction to a quadratic system.

    Only the photon-photon diagonal and the phonon-photon block change:
    M_aa gains 4i Re[b_bar] g0 Diag{1,-1,0} and the n-column of M_ba gains
    i g0 {b_bar, -b_bar, -2i Im[b_bar]}. The g0 override exists so the
    correction can be unapplied with its negative."""
    if system.kind != "quadratic":
        raise ValidationError("perturbation applies to quadratic systems only")
    g0v = params.g0 if g0 is None else g0
    b_bar = steady.b_bar
    dM = np.zeros_like(system.M)
    dM[0, 0] = 4j * b_bar.real * g0v
    dM[1, 1] = -4j * b_bar.real * g0v
    dM[3, 2] = 1j * g0v * b_bar
    dM[4, 2] = -1j * g0v * b_bar
    dM[5, 2] = 1j * g0v * (-2j * b_bar.imag)
    return dataclasses.replace(system, M=system.M + dM,
                               meta={**system.meta, "perturbation_g0": g0v})


def conjugate_pairing_residual(system: LinearLangevinSystem) -> float:
    """Max deviation from the conjugate-pairing symmetry: the row of z* must
    be the elementwise conjugate of the row of z under the column swap that
    exchanges conjugate partners. Defined for bases where every element is
    either self-adjoint or paired with its dagger."""
    labels = list(system.basis)
    perm = []
    for lab in labels:
        if lab.endswith("_dag"):
            partner = lab[:-4]
        elif lab + "_dag" in labels:
            partner = lab + "_dag"
        else:
            partner = lab if lab in ("n", "m", "N") else None
        if partner is None or partner not in labels:
            raise ValidationError(f"basis element {lab!r} has no conjugate partner")
        perm.append(labels.index(partner))
    perm = np.array(perm)
    mirrored = np.conj(system.M[perm][:, perm])
    return float(np.max(np.abs(system.M - mirrored)))
