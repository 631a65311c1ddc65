"""Steady-state mean-field solvers.

Three regimes are covered: the cubic photon-number balance of the
cubic-coupling cavity, the coupled photon/phonon balance of the quadratic
regime (with its resonant and near-resonant branches), and the static mirror
displacement. All solvers return `SteadyState` and report the residual of
the defining algebraic system so callers can gate on solution quality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateSystemError, PhysicsError, ValidationError
from .params import SystemParams

_BRANCHES = ("auto", "near_resonant", "resonant")


@dataclass(frozen=True)
class SteadyState:
    """Mean-field operating point.

    n_bar/m_bar are mean photon/phonon numbers, b_bar the complex mirror
    amplitude, d_bar the mean of the half-squared phonon operator, f the
    static frequency pull 2 g0 Re[b_bar], psi the cross population m_bar *
    n_bar. all_real_roots lists every admissible photon-number root of the
    defining equation (3 under bistability); the operating point is the
    smallest, the adiabatic continuation from zero drive.
    """

    n_bar: float
    m_bar: float
    b_bar: complex
    d_bar: complex
    f: float
    psi: float
    all_real_roots: tuple[float, ...]
    bistable: bool = False
    branch: str = "cubic"
    residual: float = 0.0
    residuals: dict[str, float] = field(default_factory=dict)
    degenerate_noise: bool = False


def mirror_displacement(n_bar: float, params: SystemParams) -> complex:
    """Static mirror amplitude b_bar = i g0 n_bar / (i Omega + Gamma/2).

    Re[b_bar] = g0 n_bar Omega / (Omega^2 + Gamma^2/4), the in-phase part
    that pulls the cavity frequency."""
    if n_bar < 0.0:
        raise ValidationError(f"n_bar must be non-negative, got {n_bar!r}")
    return 1j * params.g0 * n_bar / (1j * params.Omega + 0.5 * params.Gamma)


def cubic_shift_rate(params: SystemParams) -> float:
    """Coefficient s of the photon-number dependent detuning shift in the
    cubic balance equation, s = 4 g0^2 Omega / (Omega^2 + Gamma^2/4)."""
    return 4.0 * params.g0**2 * params.Omega / (params.Omega**2 + 0.25 * params.Gamma**2)


def _cubic_residual(n: float, delta: float, s: float, kappa: float, drive_sq: float) -> float:
    value = ((delta + s * n) ** 2 + 0.25 * kappa**2) * n - drive_sq
    return abs(value) / max(drive_sq, np.finfo(float).tiny)


def solve_cubic_steady(params: SystemParams, alpha: complex) -> SteadyState:
    """Solve ((Delta + s n)^2 + kappa^2/4) n = |alpha|^2 for the mean photon
    number, with s the shift rate above and Delta the bare-frame detuning.

    All real non-negative roots are returned in all_real_roots (sorted);
    three distinct roots set the bistable flag. Each root is polished by
    Newton iteration after the companion-matrix solve, so reinserting any
    of them reproduces the drive to ~1e-15 relative."""
    delta = params.bare_detuning()
    kappa = params.kappa
    drive_sq = abs(alpha) ** 2
    s = cubic_shift_rate(params)

    if drive_sq == 0.0:
        return SteadyState(n_bar=0.0, m_bar=0.0, b_bar=0j, d_bar=0j, f=0.0,
                           psi=0.0, all_real_roots=(0.0,), branch="cubic")

    if s == 0.0:
        roots = [drive_sq / (delta**2 + 0.25 * kappa**2)]
    else:
        raw = np.roots([s**2, 2.0 * delta * s, delta**2 + 0.25 * kappa**2, -drive_sq])
        roots = []
        for r in raw:
            if abs(r.imag) > 1e-8 * (1.0 + abs(r)):
                continue
            n = float(r.real)
            if n < -1e-12:
                continue
            for _ in range(4):  # Newton polish
                val = ((delta + s * n) ** 2 + 0.25 * kappa**2) * n - drive_sq
                dval = (delta + s * n) ** 2 + 2.0 * s * (delta + s * n) * n + 0.25 * kappa**2
                if dval == 0.0:
                    break
                n -= val / dval
            if n >= 0.0 and not any(abs(n - p) <= 1e-8 * max(n, p) for p in roots):
                roots.append(n)
        roots.sort()
    if not roots:
        raise PhysicsError("cubic steady state returned no admissible root under drive")

    n_bar = roots[0]
    b_bar = mirror_displacement(n_bar, params)
    m_bar = abs(b_bar) ** 2
    residual = max(_cubic_residual(n, delta, s, kappa, drive_sq) for n in roots)
    return SteadyState(n_bar=n_bar, m_bar=m_bar, b_bar=b_bar,
                       d_bar=0.5 * b_bar**2, f=2.0 * params.g0 * b_bar.real,
                       psi=m_bar * n_bar, all_real_roots=tuple(roots),
                       bistable=len(roots) == 3, branch="cubic",
                       residual=residual,
                       residuals={"photon_balance": residual})


# ---------------------------------------------------------------------------
# quadratic regime


def _quartic(n: float, g1: float, gp: float, amp: float) -> float:
    return 2.0 * amp * n * n + (g1 * g1 / gp) * math.sqrt(n) - 2.0 * amp * g1 * g1 / gp**2


def _quartic_deriv(n: float, g1: float, gp: float, amp: float) -> float:
    return 4.0 * amp * n + 0.5 * g1 * g1 / (gp * math.sqrt(n))


def near_resonant_photon_root(g1: float, g2: float, alpha_abs: float,
                              method: str = "hybrid") -> float:
    """Positive root of the monotone quartic balance
    2|alpha| n^2 + (g1^2/(g1+g2)) sqrt(n) = 2|alpha| g1^2/(g1+g2)^2.

    method: "bisection" runs the bracketed bisection to convergence;
    "newton" iterates the equivalent quartic in sqrt(n), which is convex
    and strictly increasing, so the iteration converges from any start;
    "hybrid" (default) runs a coarse bisection and polishes with Newton.
    The balance is strictly increasing for n > 0 so the root is unique.
    """
    if g1 <= 0.0 or g1 + g2 <= 0.0:
        raise DegenerateSystemError("quadratic steady state requires g1 > 0")
    if alpha_abs <= 0.0:
        raise ValidationError("drive amplitude must be positive for the quartic balance")
    if method not in ("hybrid", "bisection", "newton"):
        raise ValidationError(f"unknown method {method!r}")
    gp = g1 + g2
    sat = g1 / gp  # |alpha| -> inf saturation value (1+rho)^-1
    if method == "newton":
        # in u = sqrt(n) the balance is 2A u^4 + (g1^2/gp) u - 2A sat^2,
        # convex with positive slope for u >= 0: the first step lands on
        # the far side of the root and the rest descend monotonically
        lin = g1 * g1 / gp
        const = 2.0 * alpha_abs * sat * sat
        u = math.sqrt(sat)
        for _ in range(100):
            f = 2.0 * alpha_abs * u**4 + lin * u - const
            step = f / (8.0 * alpha_abs * u**3 + lin)
            u -= step
            if abs(step) <= 1e-16 * max(1.0, u):
                break
        return u * u
    lo, hi = 0.0, sat + 1.0
    iters = 200 if method == "bisection" else 40
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if _quartic(mid, g1, gp, alpha_abs) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    n = 0.5 * (lo + hi)
    if method == "hybrid":
        for _ in range(60):
            step = _quartic(n, g1, gp, alpha_abs) / _quartic_deriv(n, g1, gp, alpha_abs)
            n -= step
            if n <= 0.0:
                n = 1e-30
            if abs(step) <= 1e-16 * max(1.0, n):
                break
    return n


def _resolve_branch(params: SystemParams, branch: str) -> str:
    if branch not in _BRANCHES:
        raise ValidationError(f"branch must be one of {_BRANCHES}, got {branch!r}")
    if branch != "auto":
        return branch
    if params.detuning_reference == "shifted":
        delta_shifted = params.drive_detuning
    else:
        delta_shifted = params.drive_detuning - (params.g1 - 2.0 * params.g2)
    return "resonant" if abs(delta_shifted) <= 1e-9 * params.Omega else "near_resonant"


def solve_quadratic_steady(params: SystemParams, alpha: complex,
                           branch: str = "auto") -> SteadyState:
    """Mean fields of the quadratic regime.

    branch="near_resonant" solves the coupled balance
        4|alpha|^2   = (g1+g2)^2 m^2 n
        4 n |alpha|^2 = g1^2 (m^2 - m)
    through its equivalent monotone quartic in n; n saturates at
    (1+g2/g1)^-1 for strong drive. branch="resonant" is the
    drive-at-shifted-resonance solution with m pinned at 1 and
    n = 4|alpha|^2/(g1+g2)^2 growing without bound. branch="auto" picks
    by the shifted-frame detuning. d_bar is taken real non-negative from
    4 d^2 = m^2 - m (drive phase absorbed in the pump); the resonant
    branch has d_bar = 0, which makes the squared-phonon noise channels
    degenerate, flagged via degenerate_noise.
    """
    g1, g2 = params.g1, params.g2
    amp = abs(alpha)
    use = _resolve_branch(params, branch)
    if amp == 0.0:
        return SteadyState(n_bar=0.0, m_bar=0.0, b_bar=0j, d_bar=0j, f=0.0,
                           psi=0.0, all_real_roots=(0.0,), branch=use,
                           degenerate_noise=True)
    if g1 <= 0.0 or g1 + g2 <= 0.0:
        raise DegenerateSystemError("quadratic steady state requires g1 > 0")
    gp = g1 + g2
    drive_sq = amp * amp

    if use == "resonant":
        n_bar = 4.0 * drive_sq / gp**2
        m_bar = 1.0
        d_bar = 0.0j
        res = {"drive_balance": abs(4.0 * drive_sq - gp**2 * m_bar**2 * n_bar) / (4.0 * drive_sq)}
    else:
        n_bar = near_resonant_photon_root(g1, g2, amp)
        m_bar = 2.0 * amp / (gp * math.sqrt(n_bar))
        d_bar = complex(0.5 * math.sqrt(max(m_bar**2 - m_bar, 0.0)))
        scale = 2.0 * amp * g1 * g1 / gp**2
        # balances are normalized by their largest constituent term: m^2 - m
        # nearly cancels for m close to 1, where dividing by the balance
        # value itself would only report rounding noise amplified by 1/(m-1)
        res = {
            "quartic": abs(_quartic(n_bar, g1, gp, amp)) / scale,
            "drive_balance": abs(4.0 * drive_sq - gp**2 * m_bar**2 * n_bar)
            / max(4.0 * drive_sq, gp**2 * m_bar**2 * n_bar),
            "population_balance": abs(4.0 * n_bar * drive_sq - g1**2 * (m_bar**2 - m_bar))
            / max(4.0 * n_bar * drive_sq, g1**2 * m_bar**2, g1**2 * m_bar),
        }
    b_bar = mirror_displacement(n_bar, params)
    return SteadyState(n_bar=n_bar, m_bar=m_bar, b_bar=b_bar, d_bar=d_bar,
                       f=2.0 * params.g0 * b_bar.real, psi=m_bar * n_bar,
                       all_real_roots=(n_bar,), branch=use,
                       residual=max(res.values()), residuals=res,
                       degenerate_noise=abs(d_bar) == 0.0)


def cross_population(state: SteadyState) -> float:
    """Cross population psi = m_bar * n_bar of a solved operating point."""
    return state.m_bar * state.n_bar


def fit_psi_exponent(params: SystemParams, alphas, branch: str = "near_resonant") -> float:
    """Fitted log-log slope d log(psi) / d log|alpha| over a pump sweep.

    The resonant branch gives slope 2 (psi = n grows as the drive power),
    the near-resonant branch slope 1 (n saturates, m grows linearly)."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size < 2 or np.any(alphas <= 0.0):
        raise ValidationError("exponent fit needs at least two positive pump values")
    psis = [cross_population(solve_quadratic_steady(params, a, branch=branch))
            for a in alphas]
    slope, _ = np.polyfit(np.log(alphas), np.log(psis), 1)
    return float(slope)


def quadratic_masking_crossover(params: SystemParams, alphas):
    """Sweep the pump and locate where the resonant quadratic-branch photon
    number overtakes the cubic-balance one (the quadratic interaction then
    masks the cubic coupling, which only grows as |alpha|^(2/3)).

    Returns (alpha_cross, n_quad, n_cubic); alpha_cross is None when the
    ordering does not change over the sweep. The crossing is refined by
    bisection on log|alpha|."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size < 2 or np.any(alphas <= 0.0) or np.any(np.diff(alphas) <= 0.0):
        raise ValidationError("crossover sweep needs an increasing positive pump grid")

    def gap(a: float) -> float:
        nq = solve_quadratic_steady(params, a, branch="resonant").n_bar
        nc = solve_cubic_steady(params, a).n_bar
        return math.log(nq) - math.log(nc)

    n_quad = np.array([solve_quadratic_steady(params, a, branch="resonant").n_bar
                       for a in alphas])
    n_cubic = np.array([solve_cubic_steady(params, a).n_bar for a in alphas])
    diff = np.log(n_quad) - np.log(n_cubic)
    sign_change = np.nonzero(np.sign(diff[:-1]) != np.sign(diff[1:]))[0]
    if sign_change.size == 0:
        return None, n_quad, n_cubic
    k = int(sign_change[0])
    lo, hi = math.log(alphas[k]), math.log(alphas[k + 1])
    flo = diff[k]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = gap(math.exp(mid))
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return float(math.exp(0.5 * (lo + hi))), n_quad, n_cubic
