"""Frequency-domain solution of the linear Langevin systems.

The scattering matrix S(w) = I - F (iwI - M)^-1 F maps input channels to
output channels, with F the system's input multiplier (noise_feed). The
output spectral density of the first basis element follows by weighting
each input channel with its occupation, positive-frequency occupations for
w > 0 and negative-frequency ones for w < 0. Sideband peaks are refined by
3-point parabolic interpolation on the log spectrum, which is what makes
peak displacements far below the linewidth measurable at all.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    NotSidebandResolvedError,
    SingularResolventError,
    ValidationError,
)
from .langevin import LinearLangevinSystem
from .params import SystemParams

_PHONON_CHANNELS = {
    # label -> (positive-frequency occupation, negative-frequency occupation)
    "b_in": lambda occ: (occ + 1.0, occ),
    "b_in_dag": lambda occ: (occ, occ + 1.0),
    "b_in_sym": lambda occ: (0.25 * (2.0 * occ + 1.0),) * 2,
}

_NOISE_MODELS = ("quantum", "classical")


@dataclass(frozen=True)
class Peak:
    """One refined spectral peak: center frequency, height, and the
    full width implied by the local log-curvature."""

    center: float
    height: float
    width: float


@dataclass(frozen=True)
class SpectrumResult:
    """Output spectral density over a probe-detuning grid.

    delta_r/delta_b are the signed displacements of the red/blue sideband
    maxima from -Omega/+Omega; delta_Omega is their half-sum, the
    inequivalence of the two sidebands. They are None until an analysis
    has been run. meta echoes system scalars (kappa, occupations) that
    downstream checks need."""

    w_grid: np.ndarray
    S_AA: np.ndarray
    peaks: tuple[Peak, ...] = ()
    delta_r: float | None = None
    delta_b: float | None = None
    delta_Omega: float | None = None
    Omega: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.S_AA.shape != self.w_grid.shape:
            raise ValidationError("S_AA and w_grid must have matching shapes")
        if np.any(self.S_AA < 0.0):
            raise ValidationError("spectral density must be non-negative")
        if self.peaks:
            lo, hi = float(np.min(self.w_grid)), float(np.max(self.w_grid))
            for pk in self.peaks:
                if not lo <= pk.center <= hi:
                    raise ValidationError(
                        f"peak center {pk.center!r} outside grid [{lo}, {hi}]")


def _check_resolvent(system: LinearLangevinSystem, w_values: np.ndarray) -> None:
    # exact singularity only occurs when iw hits an undamped eigenvalue
    eigs = np.linalg.eigvals(system.M)
    dist = np.abs(1j * np.atleast_1d(w_values)[:, None] - eigs[None, :])
    hit = np.argwhere(dist == 0.0)
    if hit.size:
        i, j = hit[0]
        raise SingularResolventError(float(np.atleast_1d(w_values)[i]),
                                     complex(eigs[j]))


def scattering_matrix(system: LinearLangevinSystem, w: float) -> np.ndarray:
    """S(w) = I - F (iwI - M)^-1 F, computed by columnwise linear solve."""
    _check_resolvent(system, np.asarray([w], dtype=float))
    n = system.dim
    A = 1j * w * np.eye(n) - system.M
    try:
        X = np.linalg.solve(A, system.noise_feed)
    except np.linalg.LinAlgError as exc:
        eigs = np.linalg.eigvals(system.M)
        nearest = eigs[np.argmin(np.abs(1j * w - eigs))]
        raise SingularResolventError(float(w), complex(nearest)) from exc
    return np.eye(n) - system.noise_feed @ X


def _occupations(system: LinearLangevinSystem,
                 phonon_occupation: float | None) -> tuple[np.ndarray, np.ndarray]:
    pos = system.noise_psd_pos.astype(float).copy()
    neg = system.noise_psd_neg.astype(float).copy()
    if phonon_occupation is None:
        return pos, neg
    if phonon_occupation < 0.0:
        raise ValidationError("phonon occupation must be non-negative")
    touched = False
    for j, label in enumerate(system.input_labels):
        rebuild = _PHONON_CHANNELS.get(label)
        if rebuild is not None:
            pos[j], neg[j] = rebuild(float(phonon_occupation))
            touched = True
    if not touched:
        raise ValidationError(
            f"{system.kind} has no separable phonon input channel to re-occupy")
    return pos, neg


def output_psd(system: LinearLangevinSystem, w_grid: np.ndarray,
               noise_model: str = "quantum",
               phonon_occupation: float | None = None,
               Omega: float | None = None,
               analyze: bool = False) -> SpectrumResult:
    """Output spectral density of the first basis element over w_grid.

    S_AA(w) = sum_j |S_1j(w)|^2 occ_j(w), with occ the positive-frequency
    occupations for w > 0, the negative-frequency ones for w < 0, and their
    mean at w = 0. noise_model="classical" uses the mean everywhere, the
    symmetrized spectrum a classical trajectory average converges to.
    phonon_occupation, when given, re-occupies the phonon input channels
    (coherent-population floor instead of the built-in thermal one).
    analyze=True runs the sideband analysis and stores peaks and deltas."""
    if noise_model not in _NOISE_MODELS:
        raise ValidationError(f"unknown noise model {noise_model!r}")
    w_grid = np.asarray(w_grid, dtype=float)
    if w_grid.ndim != 1 or w_grid.size == 0:
        raise ValidationError("w_grid must be a non-empty 1-d array")
    _check_resolvent(system, w_grid)

    n = system.dim
    F = system.noise_feed
    A = 1j * w_grid[:, None, None] * np.eye(n)[None] - system.M[None]
    try:
        X = np.linalg.solve(A, np.broadcast_to(F, (w_grid.size, n, n)))
    except np.linalg.LinAlgError as exc:
        for w in w_grid:  # locate the offending frequency for the report
            try:
                np.linalg.solve(1j * w * np.eye(n) - system.M, F)
            except np.linalg.LinAlgError:
                eigs = np.linalg.eigvals(system.M)
                nearest = eigs[np.argmin(np.abs(1j * w - eigs))]
                raise SingularResolventError(float(w), complex(nearest)) from exc
        raise
    rows = np.eye(n)[0][None, :] - (F[None, 0, :, None] * X).sum(axis=1)
    weight = np.abs(rows) ** 2

    pos, neg = _occupations(system, phonon_occupation)
    if noise_model == "classical":
        s_aa = weight @ (0.5 * (pos + neg))
    else:
        s_aa = np.where(w_grid > 0.0, weight @ pos,
                        np.where(w_grid < 0.0, weight @ neg,
                                 weight @ (0.5 * (pos + neg))))
    if Omega is None:
        Omega = system.meta.get("Omega")
    meta = {"kind": system.kind, "noise_model": noise_model,
            "kappa": system.meta.get("kappa"),
            "degenerate_noise": system.degenerate_noise}
    result = SpectrumResult(w_grid=w_grid, S_AA=s_aa, Omega=Omega, meta=meta)
    if analyze:
        result = analyze_sidebands(result)
    return result


def stability(system: LinearLangevinSystem) -> tuple[np.ndarray, bool]:
    """Eigenvalues of the drift matrix (sorted by imaginary part) and
    whether every mode decays."""
    eigs = np.linalg.eigvals(system.M)
    eigs = eigs[np.lexsort((eigs.real, eigs.imag))]
    return eigs, bool(np.max(eigs.real) < 0.0)


def effective_linewidth(system: LinearLangevinSystem, Omega: float | None = None) -> float:
    """Narrowest full linewidth -2 Re[lambda] among drift eigenvalues near
    the sideband frequencies +-Omega (within half a window). Grids must
    resolve the narrowest feature there, so ties between broad and narrow
    modes at the same frequency go to the narrow one; with no eigenvalue
    near either sideband the overall closest one is used."""
    if Omega is None:
        Omega = system.meta.get("Omega")
    if Omega is None:
        raise ValidationError("mechanical frequency required to pick the sideband mode")
    eigs = np.linalg.eigvals(system.M)
    dist = np.minimum(np.abs(eigs.imag - Omega), np.abs(eigs.imag + Omega))
    near = eigs[dist <= 0.5 * abs(Omega)]
    if near.size == 0:
        near = eigs[[np.argmin(dist)]]
    return max(float(np.min(-2.0 * near.real)), np.finfo(float).tiny)


def sideband_w_grid(Omega: float, linewidth: float, span: float = 3.0,
                    dense_points: int = 10000,
                    coarse_points: int = 2001) -> np.ndarray:
    """Piecewise probe grid: dense windows of width 10*linewidth around
    +-Omega, a coarse sweep over [-span*Omega, span*Omega] elsewhere. The
    dense step is forced below linewidth/10 regardless of dense_points."""
    if Omega <= 0.0 or linewidth <= 0.0:
        raise ValidationError("Omega and linewidth must be positive")
    width = 10.0 * linewidth
    needed = int(math.ceil(width / (0.1 * linewidth))) + 1
    pts = max(int(dense_points), needed)
    half = 0.5 * width
    pieces = [np.linspace(-span * Omega, span * Omega, int(coarse_points))]
    for center in (-Omega, Omega):
        pieces.append(np.linspace(center - half, center + half, pts))
    grid = np.unique(np.concatenate(pieces))
    return grid[(grid >= -span * Omega) & (grid <= span * Omega)]


def _refine_peak(w: np.ndarray, s: np.ndarray, lo: float, hi: float) -> Peak:
    mask = (w >= lo) & (w <= hi)
    if np.count_nonzero(mask) < 3:
        raise ValidationError(
            f"grid has fewer than 3 points in window [{lo!r}, {hi!r}]")
    ww, ss = w[mask], s[mask]
    k = int(np.argmax(ss))
    if k == 0 or k == ss.size - 1:
        raise NotSidebandResolvedError(
            f"spectrum maximum sits at the edge of window [{lo!r}, {hi!r}]")
    if np.any(ss[k - 1:k + 2] <= 0.0):
        raise NotSidebandResolvedError("vanishing spectral density at the peak")
    # parabola through 3 log-PSD points; handles uneven steps at window joins
    coeffs = np.polyfit(ww[k - 1:k + 2] - ww[k], np.log(ss[k - 1:k + 2]), 2)
    a, b, c = coeffs
    if a >= 0.0:
        raise NotSidebandResolvedError("no local curvature at the window maximum")
    center = ww[k] - b / (2.0 * a)
    height = math.exp(c - b * b / (4.0 * a))
    width = 2.0 * math.sqrt(-1.0 / a)  # Lorentzian FWHM from log-curvature
    return Peak(center=float(center), height=float(height), width=float(width))


def analyze_sidebands(spectrum: SpectrumResult) -> SpectrumResult:
    """Locate the red and blue sideband peaks and store the signed
    displacements delta_r, delta_b and their half-sum delta_Omega.

    The red window is [-3/2 Omega, -1/2 Omega], the blue one its mirror;
    analysis refuses (not-sideband-resolved) when the cavity linewidth
    exceeds the mechanical frequency, when a window maximum sits at the
    window edge, or when a refined peak is wider than Omega."""
    Omega = spectrum.Omega
    if Omega is None or Omega <= 0.0:
        raise ValidationError("spectrum carries no mechanical frequency")
    kappa = spectrum.meta.get("kappa")
    if kappa is not None and kappa > Omega:
        raise NotSidebandResolvedError(
            f"cavity linewidth {kappa!r} exceeds mechanical frequency {Omega!r}")
    w, s = spectrum.w_grid, spectrum.S_AA
    red = _refine_peak(w, s, -1.5 * Omega, -0.5 * Omega)
    blue = _refine_peak(w, s, 0.5 * Omega, 1.5 * Omega)
    for pk in (red, blue):
        if pk.width > Omega:
            raise NotSidebandResolvedError(
                f"sideband width {pk.width!r} exceeds mechanical frequency {Omega!r}")
    delta_r = red.center + Omega
    delta_b = blue.center - Omega
    return dataclasses.replace(
        spectrum, peaks=(red, blue), delta_r=float(delta_r),
        delta_b=float(delta_b), delta_Omega=float(0.5 * (delta_r + delta_b)))


def sideband_analysis(spectrum: SpectrumResult) -> tuple[float, float, float]:
    """(delta_r, delta_b, delta_Omega) of the spectrum's two sidebands."""
    out = analyze_sidebands(spectrum)
    return out.delta_r, out.delta_b, out.delta_Omega


def estimate_validity(params: SystemParams, n_bar: float) -> tuple[str, ...]:
    """Violated preconditions of the sideband-displacement estimate, as
    human-readable strings (empty when the estimate is trustworthy)."""
    issues = []
    coupling = params.g0 * math.sqrt(max(n_bar, 0.0))
    if not params.Omega > 10.0 * coupling:
        issues.append(
            f"Omega={params.Omega!r} not large against g0*sqrt(n_bar)={coupling!r}")
    if not params.Omega > 10.0 * params.kappa:
        issues.append(
            f"Omega={params.Omega!r} not large against kappa={params.kappa!r}")
    return tuple(issues)


def estimate_inequivalence(params: SystemParams, n_bar: float) -> float:
    """Leading-order sideband displacement g0^2 n_bar / Omega.

    Warns (UserWarning) when the weak-coupling or sideband-resolution
    premises behind the formula do not hold."""
    if n_bar < 0.0:
        raise ValidationError("n_bar must be non-negative")
    for issue in estimate_validity(params, n_bar):
        warnings.warn(f"sideband estimate outside its regime: {issue}",
                      UserWarning, stacklevel=2)
    return params.g0**2 * n_bar / params.Omega
