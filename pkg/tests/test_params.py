"""Parameter container, derived-rate ladder, and unit ingestion tests."""

import dataclasses
import math

import pytest

from optomech.exceptions import (
    RatioUndefinedError,
    UnphysicalShiftError,
    ValidationError,
)
from optomech.params import (
    QUADRATIC_RATIO_PREFACTOR,
    SystemParams,
    apply_derived_rates,
    betas,
    derive_rates,
    shifted_frequencies,
)


def _params(**kw):
    base = dict(omega=5.0, Omega=1.0, kappa=0.4, Gamma=0.02)
    base.update(kw)
    return SystemParams(**base)


class TestSystemParams:
    def test_frozen(self):
        p = _params()
        with pytest.raises(dataclasses.FrozenInstanceError):
            p.kappa = 1.0

    @pytest.mark.parametrize("field,value", [
        ("omega", 0.0), ("Omega", -1.0), ("kappa", 0.0), ("Gamma", -0.1),
        ("g0", -1e-9), ("g3", -0.5), ("m_th", -0.1), ("l", 0.0),
        ("x_zp", -1e-6), ("detuning_reference", "lab"),
    ])
    def test_rejects_bad_values(self, field, value):
        with pytest.raises(ValidationError):
            _params(**{field: value})

    def test_zero_point_must_fit_in_cavity(self):
        with pytest.raises(ValidationError):
            _params(x_zp=2.0, l=1.0)
        _params(x_zp=0.5, l=1.0)  # strict inequality is fine

    def test_rho(self):
        assert _params(g1=0.2, g2=0.05).rho == pytest.approx(0.25)
        with pytest.raises(RatioUndefinedError):
            _ = _params(g2=0.05).rho

    def test_detuning_reference(self):
        p = _params(drive_detuning=-0.3, g1=0.2, g2=0.05)
        assert p.bare_detuning() == pytest.approx(-0.3)
        q = p.replace(detuning_reference="shifted")
        assert q.bare_detuning() == pytest.approx(-0.3 + 0.2 - 0.1)

    def test_replace_returns_new_instance(self):
        p = _params()
        q = p.replace(kappa=0.9)
        assert q.kappa == 0.9 and p.kappa == 0.4


class TestFromMapping:
    def test_roundtrip(self):
        p = SystemParams.from_mapping(
            {"omega": 5.0, "Omega": 1.0, "kappa": 0.4, "Gamma": 0.02,
             "g0": 0.01, "alpha": 0.3, "m_th": 2.0})
        assert p.g0 == 0.01 and p.alpha == 0.3 and p.m_th == 2.0

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValidationError) as err:
            SystemParams.from_mapping(
                {"omega": 5.0, "Omega": 1.0, "kappa": 0.4, "Gamma": 0.02,
                 "coupling": 0.1})
        assert "coupling" in str(err.value)

    def test_alpha_as_pair(self):
        p = SystemParams.from_mapping(
            {"omega": 5.0, "Omega": 1.0, "kappa": 0.4, "Gamma": 0.02,
             "alpha": [0.3, -0.4]})
        assert p.alpha == pytest.approx(0.3 - 0.4j)
        with pytest.raises(ValidationError):
            SystemParams.from_mapping(
                {"omega": 5.0, "Omega": 1.0, "kappa": 0.4, "Gamma": 0.02,
                 "alpha": [1.0, 2.0, 3.0]})

    def test_hz_units_scale_rates_only(self):
        p = SystemParams.from_mapping(
            {"omega": 5.0, "Omega": 1.0, "kappa": 0.4, "Gamma": 0.02,
             "g0": 0.01, "drive_detuning": -1.0, "alpha": [1.0, 0.0],
             "m_th": 2.0, "x_zp": 1e-3, "l": 1.0},
            units_hz=True)
        two_pi = 2.0 * math.pi
        assert p.omega == pytest.approx(5.0 * two_pi)
        assert p.g0 == pytest.approx(0.01 * two_pi)
        assert p.drive_detuning == pytest.approx(-two_pi)
        assert p.alpha == pytest.approx(two_pi + 0j)
        # dimensionless and geometric quantities stay untouched
        assert p.m_th == 2.0 and p.x_zp == 1e-3 and p.l == 1.0


class TestDerivedRates:
    def test_prefactor_value(self):
        assert QUADRATIC_RATIO_PREFACTOR == pytest.approx(
            0.25 * (math.pi**2 / 3.0 + 0.25))

    def test_ladder(self):
        rs = derive_rates(g0=0.2, omega=2.0, Omega=1.0, x_zp=1e-3, l=1.0)
        ratio = QUADRATIC_RATIO_PREFACTOR * 0.25
        assert rs.g1 == pytest.approx(2e-4)
        assert rs.g2 == pytest.approx(ratio * 2e-4)
        assert rs.g3 == pytest.approx(2e-7)
        assert rs.g4 == pytest.approx(ratio * 2e-7 / (3.0 * math.sqrt(2.0)))
        assert rs.beta_plus == pytest.approx(1.0 / ratio + 1.0)
        assert rs.beta_minus == pytest.approx(1.0 / ratio - 1.0)

    def test_equal_frequencies_give_saturation_ratio(self):
        # Omega = omega puts g2/g1 at the bare prefactor, about 0.885
        rs = derive_rates(g0=0.1, omega=1.0, Omega=1.0, x_zp=1e-2, l=1.0)
        assert rs.g2 / rs.g1 == pytest.approx(QUADRATIC_RATIO_PREFACTOR)

    def test_vanishing_mechanical_frequency(self):
        rs = derive_rates(g0=0.1, omega=1.0, Omega=0.0, x_zp=1e-2, l=1.0)
        assert rs.g2 == 0.0 and rs.g4 == 0.0
        assert rs.beta_plus is None and rs.beta_minus is None

    @pytest.mark.parametrize("kw", [
        dict(g0=0.0), dict(omega=0.0), dict(Omega=-1.0),
        dict(x_zp=0.0), dict(x_zp=2.0),
    ])
    def test_validation(self, kw):
        base = dict(g0=0.1, omega=1.0, Omega=1.0, x_zp=1e-2, l=1.0)
        base.update(kw)
        with pytest.raises(ValidationError):
            derive_rates(**base)

    def test_betas_standalone(self):
        bp, bm = betas(0.2, 0.05)
        assert (bp, bm) == (5.0, 3.0)
        with pytest.raises(RatioUndefinedError):
            betas(0.2, 0.0)

    def test_apply_derived_rates(self):
        p = _params(g0=0.2, omega=2.0, x_zp=1e-3)
        q = apply_derived_rates(p)
        assert q.g1 == pytest.approx(2e-4)
        assert q.g3 == pytest.approx(2e-7)
        assert p.g1 == 0.0  # original untouched


class TestShiftedFrequencies:
    def test_values(self):
        w, W = shifted_frequencies(_params(g1=0.2, g2=0.05))
        assert w == pytest.approx(5.0 + 0.2 - 0.1)
        assert W == pytest.approx(1.0 - 0.1)

    def test_unphysical_shift(self):
        with pytest.raises(UnphysicalShiftError):
            shifted_frequencies(_params(g2=0.5))
