"""Physical parameters, derived interaction-rate ladder, shifted frequencies.

All rates and frequencies are angular (rad/s) and hbar = 1 throughout, so
energies are rates. Configuration may supply plain Hz; conversion by 2*pi
happens at ingestion (see `SystemParams.from_mapping`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Mapping, Optional, Tuple

from .exceptions import RatioUndefinedError, UnphysicalShiftError, ValidationError

# g2/g1 for the ideal cavity: (1/4)(pi^2/3 + 1/4) (Omega/omega)^2
QUADRATIC_RATIO_PREFACTOR = 0.25 * (math.pi**2 / 3.0 + 0.25)

_DETUNING_REFERENCES = ("bare", "shifted")


@dataclass(frozen=True)
class SystemParams:
    """All physical rates and frequencies of the driven optomechanical cavity.

    Parameters
    ----------
    omega, Omega : float
        Optical and mechanical resonance angular frequencies [rad/s].
    kappa, Gamma : float
        Optical and mechanical energy decay rates [rad/s].
    g0 : float
        Single-photon interaction rate [rad/s].
    g1, g2 : float
        Standard and non-standard quadratic interaction rates [rad/s].
    g3, g4 : float
        Standard and non-standard quartic interaction rates [rad/s].
    alpha : complex
        Drive amplitude, rate-normalized.
    drive_detuning : float
        Delta = omega_drive - omega [rad/s]. Interpreted against the bare or
        the interaction-shifted optical frequency according to
        `detuning_reference`.
    m_th : float
        Thermal phonon occupation (dimensionless).
    x_zp : float
        Zero-point displacement [m].
    l : float
        Cavity length [m].
    detuning_reference : str
        "bare" or "shifted". Which optical frequency `drive_detuning` is
        measured against; exposed as a switch because the convention is
        ambiguous in mixed scenarios.
    """

    omega: float
    Omega: float
    kappa: float
    Gamma: float
    g0: float = 0.0
    g1: float = 0.0
    g2: float = 0.0
    g3: float = 0.0
    g4: float = 0.0
    alpha: complex = 0j
    drive_detuning: float = 0.0
    m_th: float = 0.0
    x_zp: float = 0.0
    l: float = 1.0
    detuning_reference: str = "bare"

    def __post_init__(self):
        for name in ("omega", "Omega", "kappa", "Gamma"):
            if not getattr(self, name) > 0.0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("g0", "g1", "g2", "g3", "g4"):
            if getattr(self, name) < 0.0:
                raise ValidationError(f"{name} must be non-negative, got {getattr(self, name)!r}")
        if self.m_th < 0.0:
            raise ValidationError(f"m_th must be non-negative, got {self.m_th!r}")
        if self.l <= 0.0:
            raise ValidationError(f"l must be positive, got {self.l!r}")
        if self.x_zp < 0.0:
            raise ValidationError(f"x_zp must be non-negative, got {self.x_zp!r}")
        if not self.x_zp < self.l:
            raise ValidationError(f"x_zp must be smaller than l, got x_zp={self.x_zp!r} l={self.l!r}")
        if self.detuning_reference not in _DETUNING_REFERENCES:
            raise ValidationError(
                f"detuning_reference must be one of {_DETUNING_REFERENCES}, got {self.detuning_reference!r}"
            )

    @property
    def rho(self) -> float:
        """Ratio rho = g2/g1; defined only for g1 > 0."""
        if self.g1 <= 0.0:
            raise RatioUndefinedError("rho = g2/g1 undefined for g1 = 0")
        return self.g2 / self.g1

    def bare_detuning(self) -> float:
        """Drive detuning referred to the bare optical frequency.

        With detuning_reference = "shifted" the stored value is measured
        against omega + g1 - 2*g2, so the bare-frame detuning picks up the
        shift g1 - 2*g2.
        """
        if self.detuning_reference == "shifted":
            return self.drive_detuning + self.g1 - 2.0 * self.g2
        return self.drive_detuning

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, object], units_hz: bool = False) -> "SystemParams":
        """Build from a flat key/value mapping, rejecting unknown keys.

        With units_hz=True, every frequency-like quantity (frequencies, decay
        rates, interaction rates, drive amplitude, detuning) is multiplied by
        2*pi. Complex alpha may be given as [re, im].
        """
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ValidationError(f"unknown parameter keys: {sorted(unknown)}")
        kw = dict(mapping)
        if "alpha" in kw and isinstance(kw["alpha"], (list, tuple)):
            re_im = kw["alpha"]
            if len(re_im) != 2:
                raise ValidationError(f"alpha as a pair must be [re, im], got {kw['alpha']!r}")
            kw["alpha"] = complex(float(re_im[0]), float(re_im[1]))
        if units_hz:
            two_pi = 2.0 * math.pi
            for name in ("omega", "Omega", "kappa", "Gamma", "g0", "g1", "g2",
                         "g3", "g4", "drive_detuning"):
                if name in kw:
                    kw[name] = float(kw[name]) * two_pi
            if "alpha" in kw:
                kw["alpha"] = complex(kw["alpha"]) * two_pi
        return cls(**kw)


@dataclass(frozen=True)
class RateSet:
    """Derived interaction-rate ladder and the beta ratios.

    beta_pm = (g1/g2) +- 1; undefined (None) when g2 = 0.
    """

    g1: float
    g2: float
    g3: float
    g4: float
    beta_plus: Optional[float] = field(default=None)
    beta_minus: Optional[float] = field(default=None)


def derive_rates(g0: float, omega: float, Omega: float, x_zp: float, l: float) -> RateSet:
    """Derive the ideal-cavity interaction-rate ladder from g0.

    g1 = (x_zp/l) g0, g2 = (1/4)(pi^2/3 + 1/4)(Omega/omega)^2 g1,
    g3 = (x_zp/l) g1 (quartic rates are weaker than quadratic by the same
    x_zp/l factor), g4 = (1/(3 sqrt 2)) (g2/g1) g3.

    Omega = 0 is accepted as the vanishing mechanical/optical-ratio limit and
    yields g2 = g4 = 0 with undefined betas.
    """
    if not g0 > 0.0:
        raise ValidationError(f"g0 must be positive, got {g0!r}")
    if not omega > 0.0:
        raise ValidationError(f"omega must be positive, got {omega!r}")
    if Omega < 0.0:
        raise ValidationError(f"Omega must be non-negative, got {Omega!r}")
    if not 0.0 < x_zp < l:
        raise ValidationError(f"need 0 < x_zp < l, got x_zp={x_zp!r} l={l!r}")

    ratio = QUADRATIC_RATIO_PREFACTOR * (Omega / omega) ** 2
    g1 = (x_zp / l) * g0
    g2 = ratio * g1
    g3 = (x_zp / l) * g1
    g4 = (1.0 / (3.0 * math.sqrt(2.0))) * ratio * g3
    if g2 > 0.0:
        beta_plus: Optional[float] = g1 / g2 + 1.0
        beta_minus: Optional[float] = g1 / g2 - 1.0
    else:
        beta_plus = beta_minus = None
    return RateSet(g1=g1, g2=g2, g3=g3, g4=g4, beta_plus=beta_plus, beta_minus=beta_minus)


def betas(g1: float, g2: float) -> Tuple[float, float]:
    """(beta_plus, beta_minus) for given rates; error when g2 = 0."""
    if g2 <= 0.0:
        raise RatioUndefinedError("beta ratios undefined for g2 = 0")
    return g1 / g2 + 1.0, g1 / g2 - 1.0


def apply_derived_rates(params: SystemParams) -> SystemParams:
    """Return params with g1..g4 replaced by the ideal-cavity ladder."""
    rs = derive_rates(params.g0, params.omega, params.Omega, params.x_zp, params.l)
    return params.replace(g1=rs.g1, g2=rs.g2, g3=rs.g3, g4=rs.g4)


def shifted_frequencies(params: SystemParams) -> Tuple[float, float]:
    """Interaction-shifted frequencies (omega + g1 - 2 g2, Omega - 2 g2).

    Raises UnphysicalShiftError when the shifted mechanical frequency is not
    positive.
    """
    omega_eff = params.omega + params.g1 - 2.0 * params.g2
    Omega_eff = params.Omega - 2.0 * params.g2
    if Omega_eff <= 0.0:
        raise UnphysicalShiftError(
            f"shifted mechanical frequency {Omega_eff!r} is not positive"
        )
    return omega_eff, Omega_eff
