"""Tests for the linear Langevin system builders.

Frozen matrix entries below were evaluated by hand from the defining
formulas at small round-number operating points. The structural oracles are
independent routes: a finite-difference Jacobian of the semiclassical
vector field for the first-order build, and the exact Fock-space commutator
drift for the minimal pair.
"""

import dataclasses
import math

import numpy as np
import pytest

from optomech import fock, langevin
from optomech.exceptions import DegenerateNoiseWarning, ValidationError
from optomech.params import SystemParams
from optomech.steady import SteadyState, solve_cubic_steady, solve_quadratic_steady


def _params(**kw):
    base = dict(omega=5.0, Omega=1.0, kappa=0.1, Gamma=1e-4, g0=0.005,
                drive_detuning=-1.0, alpha=0.8 + 0j, m_th=1.0)
    base.update(kw)
    return SystemParams(**base)


def _point(n_bar=4.0, b_bar=0.5 + 0j, f=0.002, **kw):
    fields = dict(n_bar=n_bar, m_bar=abs(b_bar) ** 2, b_bar=b_bar,
                  d_bar=0.5 * b_bar**2, f=f, psi=n_bar * abs(b_bar) ** 2,
                  all_real_roots=(n_bar,))
    fields.update(kw)
    return SteadyState(**fields)


class TestFirstOrder:
    def test_frozen_entries(self):
        p = _params()
        sys = langevin.build_first_order(p, _point())
        # g = g0 sqrt(n_bar) = 0.005 * 2, effective detuning -1 + 0.002
        assert sys.M[2, 0] == pytest.approx(0.01j)
        assert sys.M[0, 0] == pytest.approx(-0.998j - 0.05)
        assert sys.M[1, 1] == pytest.approx(0.998j - 0.05)
        assert sys.M[3, 0] == pytest.approx(-0.01j)
        assert sys.M[0, 2] == sys.M[0, 3] == pytest.approx(0.01j)
        assert sys.M[2, 3] == sys.M[3, 2] == 0.0
        assert np.allclose(np.diag(sys.gamma), [0.1, 0.1, 1e-4, 1e-4])
        assert np.allclose(sys.noise_feed, np.diag(np.sqrt([0.1, 0.1, 1e-4, 1e-4])))
        assert np.allclose(sys.noise_psd_pos, [1.0, 0.0, 2.0, 1.0])
        assert np.allclose(sys.noise_psd_neg, [0.0, 1.0, 1.0, 2.0])
        assert np.allclose(sys.drive, [0.8, 0.8, 0.0, 0.0])
        assert sys.basis == ("a", "a_dag", "b", "b_dag")
        assert sys.frame == "detuning"

    def test_auto_steady_matches_cubic_solver(self):
        p = _params(alpha=0.3 + 0.1j)
        ref = solve_cubic_steady(p, p.alpha)
        sys = langevin.build_first_order(p)
        assert sys.meta["n_bar"] == pytest.approx(ref.n_bar)
        assert sys.meta["f"] == pytest.approx(2.0 * p.g0 * ref.b_bar.real)

    def test_conjugate_pairing_exact(self):
        sys = langevin.build_first_order(_params(), _point(b_bar=0.3 + 0.2j))
        assert langevin.conjugate_pairing_residual(sys) == 0.0

    @pytest.mark.parametrize("over", [
        dict(),
        dict(drive_detuning=0.3, g0=0.02, alpha=0.4 + 0j, Gamma=0.05),
        dict(drive_detuning=0.0, kappa=0.8, alpha=1.5 + 0j, m_th=0.0),
        dict(Omega=2.5, g0=0.08, alpha=2.0 + 0j, kappa=0.3, Gamma=0.01),
    ])
    def test_matches_semiclassical_jacobian(self, over):
        """M equals the Jacobian of the nonlinear mean-field flow at the
        operating point (pump phase fixed so the field amplitude is real).
        Central differences are exact here: the flow is quadratic in the
        phase-space coordinates."""
        p = _params(**over)
        steady = solve_cubic_steady(p, p.alpha)
        sys = langevin.build_first_order(p, steady)
        delta, kap, Gam, Om, g0 = (p.bare_detuning(), p.kappa, p.Gamma,
                                   p.Omega, p.g0)

        def flow(v):
            a, ad, b, bd = v
            return np.array([
                (1j * delta - 0.5 * kap) * a + 1j * g0 * a * (b + bd) - p.alpha,
                (-1j * delta - 0.5 * kap) * ad - 1j * g0 * ad * (b + bd)
                - np.conj(p.alpha),
                (-1j * Om - 0.5 * Gam) * b + 1j * g0 * ad * a,
                (1j * Om - 0.5 * Gam) * bd - 1j * g0 * ad * a,
            ])

        amp = math.sqrt(steady.n_bar)
        point = np.array([amp, amp, steady.b_bar, np.conj(steady.b_bar)])
        h = 1e-6
        jac = np.empty((4, 4), dtype=np.complex128)
        for j in range(4):
            e = np.zeros(4)
            e[j] = h
            jac[:, j] = (flow(point + e) - flow(point - e)) / (2.0 * h)
        assert np.max(np.abs(jac - sys.M)) < 1e-9

    def test_red_detuned_point_is_stable(self):
        p = _params(drive_detuning=-1.0, alpha=0.5 + 0j)
        sys = langevin.build_first_order(p)
        assert np.all(np.linalg.eigvals(sys.M).real < 0.0)


class TestSecondOrder:
    def test_frozen_entries(self):
        p = _params(kappa=0.2, Gamma=0.5, g0=0.01, drive_detuning=-1.0)
        sys = langevin.build_second_order(p, _point())
        # composite damping (kappa+Gamma)/2 = 0.35; Omega + Delta = 0
        assert sys.M[0, 1] == sys.M[0, 2] == pytest.approx(0.01j)
        assert sys.M[1, 0] == pytest.approx(0.01j * (0.25 + 4.0 + 1.0))
        assert sys.M[2, 0] == pytest.approx(0.01j * (0.25 - 4.0))
        assert sys.M[1, 1] == pytest.approx(-2.0j - 0.35)
        assert sys.M[2, 2] == pytest.approx(-0.35)
        assert sys.M[1, 2] == sys.M[2, 1] == 0.0
        assert np.allclose(sys.drive, [0.8, 0.0, 0.0])
        assert sys.basis == ("a", "ab", "ab_dag")

    def test_triangular_decay_is_the_input_multiplier(self):
        p = _params(kappa=0.2, Gamma=0.5)
        sys = langevin.build_second_order(p, _point())
        expected = np.array([
            [0.2, 0.0, 0.0],
            [0.2 * 0.5, 0.5 * 2.0, 0.0],
            [0.2 * 0.5, 0.0, 0.5 * 2.0],
        ])
        assert np.allclose(sys.gamma, expected)
        assert np.allclose(sys.noise_feed, sys.gamma)
        assert np.allclose(sys.noise_psd_pos, [1.0, 2.0, 1.0])
        assert np.allclose(sys.noise_psd_neg, [0.0, 1.0, 2.0])

    def test_displacement_shift_moves_only_composite_diagonals(self):
        """The retained mean-field diagonal terms displace both composite
        resonances by g0 b_bar; this is the whole difference between the
        two variants and the origin of the sideband asymmetry."""
        p = _params(g0=0.01)
        pt = _point(b_bar=0.5 + 0.3j)
        plain = langevin.build_second_order(p, pt)
        shifted = langevin.build_second_order(p, pt, displacement_shift=True)
        diff = shifted.M - plain.M
        assert diff[1, 1] == pytest.approx(1j * 0.01 * (0.5 + 0.3j))
        assert diff[2, 2] == pytest.approx(1j * 0.01 * (0.5 - 0.3j))
        diff[1, 1] = diff[2, 2] = 0.0
        assert np.max(np.abs(diff)) == 0.0
        assert abs(shifted.M[1, 1] - plain.M[1, 1]) == pytest.approx(
            0.01 * abs(pt.b_bar))

    def test_degenerate_noise_warns_at_zero_field(self):
        p = _params()
        with pytest.warns(DegenerateNoiseWarning):
            sys = langevin.build_second_order(p, _point(n_bar=0.0, b_bar=0j))
        assert sys.degenerate_noise

    def test_pairing_undefined_for_this_basis(self):
        sys = langevin.build_second_order(_params(), _point())
        with pytest.raises(ValidationError):
            langevin.conjugate_pairing_residual(sys)


class TestMinimalFourth:
    def test_frozen_drive_and_matrix(self):
        p = _params(kappa=0.3, Gamma=0.1, g0=0.02, alpha=1.0 + 0j, m_th=2.0)
        sys = langevin.build_minimal_fourth(p, _point(n_bar=1.0, b_bar=0.5 + 0j))
        assert np.allclose(sys.drive, [2.0, 1.0])
        assert np.allclose(sys.M, [[-0.6, 0.0], [0.02j, -1j - 0.2]])
        assert np.allclose(np.diag(sys.gamma), [0.6, 0.4])
        # optical weight 0.75 * 0.25, mechanical weight 0.25 * 1
        assert sys.noise_psd_pos[0] == pytest.approx(0.25)
        assert sys.noise_psd_pos[1] == pytest.approx(0.1875 + 0.75)
        assert sys.noise_psd_neg[1] == pytest.approx(0.1875 + 0.5)
        assert sys.basis == ("N", "B")

    def test_drive_uses_real_part_of_pump(self):
        p = _params(alpha=1j)
        sys = langevin.build_minimal_fourth(p, _point(n_bar=1.0))
        assert np.allclose(sys.drive, 0.0)

    def test_matches_fock_commutator_drift(self):
        """With damping off, the closed pair evolves exactly as the 2x2
        drift says: dB/dt = i g0 N - i Omega B and dN/dt = 0. Verified
        against the full commutator in a truncated Fock space."""
        p = _params(g0=0.2, alpha=0j)
        rep = fock.build_mode_ops(8, 8)
        h = fock.build_hamiltonian(rep, p, frame="lab")
        mask = fock.safe_columns(rep)
        drift_b = fock.heisenberg_drift(rep.B, h)
        target_b = 1j * p.g0 * rep.N - 1j * p.Omega * rep.B
        assert np.max(np.abs((drift_b - target_b)[:, mask])) < 1e-9
        drift_n = fock.heisenberg_drift(rep.N, h)
        assert np.max(np.abs(drift_n[:, mask])) < 1e-9
        sys = langevin.build_minimal_fourth(p, _point(n_bar=1.0))
        assert sys.M[1, 0] == 1j * p.g0
        assert sys.M[0, 1] == 0.0


class TestQuadratic:
    def _p(self, **kw):
        base = dict(omega=5.0, Omega=10.0, kappa=0.1, Gamma=0.2,
                    g1=2.0, g2=1.0, alpha=0.5 + 0j, m_th=1.0)
        base.update(kw)
        return SystemParams(**base)

    def _pt(self, n_bar=1.0, m_bar=2.0):
        d = 0.5 * math.sqrt(m_bar**2 - m_bar)
        return SteadyState(n_bar=n_bar, m_bar=m_bar, b_bar=0j,
                           d_bar=complex(d), f=0.0, psi=n_bar * m_bar,
                           all_real_roots=(n_bar,), branch="near_resonant")

    def test_frozen_entries(self):
        sys = langevin.build_quadratic(self._p(), self._pt())
        # shifted frequencies 5 + 2 - 2 = 5 and 10 - 2 = 8
        assert sys.meta["omega_shifted"] == pytest.approx(5.0)
        assert sys.meta["Omega_shifted"] == pytest.approx(8.0)
        assert sys.M[0, 0] == pytest.approx(2j * (5.0 - 3.0 * 2.0) - 0.1)
        assert sys.M[0, 2] == pytest.approx(-0.5j * 2.0)
        assert sys.M[2, 0] == pytest.approx(2j)
        assert sys.M[0, 3] == pytest.approx(0.5j * 1.5)
        assert sys.M[0, 5] == pytest.approx(-0.5j * 1.5)
        assert sys.M[3, 0] == pytest.approx(2.5j)
        assert sys.M[3, 2] == pytest.approx(-2.5j)
        assert sys.M[3, 3] == pytest.approx(-2j * (8.0 + 3.0) - 0.2)
        assert sys.M[3, 5] == pytest.approx(-1j)
        assert sys.M[5, 3] == pytest.approx(2j)
        assert sys.M[5, 5] == pytest.approx(-0.2)
        assert np.all(sys.drive == 0.0)
        assert sys.frame == "absolute"

    def test_frozen_decay_and_noise(self):
        sys = langevin.build_quadratic(self._p(), self._pt())
        d = 0.5 * math.sqrt(2.0)
        assert np.allclose(np.diag(sys.gamma),
                           [0.1, 0.1, 0.4, 0.4 * d, 0.4 * d, 0.8 * d])
        assert np.allclose(sys.noise_psd_pos, [1.0, 0.0, 0.25, 2.0, 1.0, 0.75])
        assert np.allclose(sys.noise_psd_neg, [0.0, 1.0, 0.25, 1.0, 2.0, 0.75])

    def test_conjugate_pairing_holds(self):
        sys = langevin.build_quadratic(self._p(), self._pt())
        assert langevin.conjugate_pairing_residual(sys) < 1e-14

    def test_single_rate_assembly(self):
        """g2 = 0 must stay finite and reduce to the g1-only couplings."""
        sys = langevin.build_quadratic(self._p(g2=0.0), self._pt())
        assert np.all(sys.M[:3, 3:] == 0.0)
        assert sys.M[0, 2] == 0.0
        assert sys.M[3, 0] == 0.0
        assert sys.M[3, 2] == pytest.approx(-1j * 2.0 * 2.5)
        assert sys.M[5, 3] == pytest.approx(2j * 2.0 * 1.0)
        assert sys.M[0, 0] == pytest.approx(2j * (7.0 - 2.0 * 2.0) - 0.1)

    def test_auto_steady_matches_quadratic_solver(self):
        p = self._p(drive_detuning=0.5)
        ref = solve_quadratic_steady(p, p.alpha)
        sys = langevin.build_quadratic(p)
        assert sys.meta["n_bar"] == pytest.approx(ref.n_bar)
        assert sys.meta["m_bar"] == pytest.approx(ref.m_bar)

    def test_degenerate_branch_warns(self):
        pt = SteadyState(n_bar=1.0, m_bar=1.0, b_bar=0j, d_bar=0j, f=0.0,
                         psi=1.0, all_real_roots=(1.0,), branch="resonant",
                         degenerate_noise=True)
        with pytest.warns(DegenerateNoiseWarning):
            sys = langevin.build_quadratic(self._p(), pt)
        assert sys.degenerate_noise
        assert np.diag(sys.gamma)[3] == 0.0


class TestPerturbation:
    def _base(self):
        p = TestQuadratic._p(TestQuadratic(), g0=0.01)
        pt = TestQuadratic._pt(TestQuadratic())
        return p, pt, langevin.build_quadratic(p, pt)

    def test_frozen_correction(self):
        p, pt, sys = self._base()
        pt = dataclasses.replace(pt, b_bar=1.0 + 1.0j)
        out = langevin.apply_optomech_perturbation(sys, p, pt)
        d = out.M - sys.M
        assert d[0, 0] == pytest.approx(0.04j)
        assert d[1, 1] == pytest.approx(-0.04j)
        assert d[3, 2] == pytest.approx(0.01j * (1.0 + 1.0j))
        assert d[4, 2] == pytest.approx(-0.01j * (1.0 + 1.0j))
        assert d[5, 2] == pytest.approx(0.02)
        d[0, 0] = d[1, 1] = d[3, 2] = d[4, 2] = d[5, 2] = 0.0
        assert np.max(np.abs(d)) == 0.0

    def test_real_displacement_preserves_pairing(self):
        p, pt, sys = self._base()
        pt = dataclasses.replace(pt, b_bar=0.7 + 0j)
        out = langevin.apply_optomech_perturbation(sys, p, pt)
        assert langevin.conjugate_pairing_residual(out) < 1e-14

    def test_complex_displacement_breaks_pairing_quantitatively(self):
        """The published phonon-photon correction carries b_bar, not its
        conjugate, in the row of d*; for complex displacement this violates
        the pairing symmetry by exactly 2 g0 |Im b_bar|."""
        p, pt, sys = self._base()
        pt = dataclasses.replace(pt, b_bar=1.0 + 1.0j)
        out = langevin.apply_optomech_perturbation(sys, p, pt)
        assert langevin.conjugate_pairing_residual(out) == pytest.approx(
            2.0 * 0.01 * 1.0)

    def test_sign_inverse(self):
        p, pt, sys = self._base()
        pt = dataclasses.replace(pt, b_bar=0.4 + 0.2j)
        fwd = langevin.apply_optomech_perturbation(sys, p, pt, g0=0.03)
        back = langevin.apply_optomech_perturbation(fwd, p, pt, g0=-0.03)
        assert np.allclose(back.M, sys.M, atol=1e-15)

    def test_rejects_other_kinds(self):
        p = _params()
        sys = langevin.build_first_order(p, _point())
        with pytest.raises(ValidationError):
            langevin.apply_optomech_perturbation(sys, p, _point())


class TestValidation:
    def test_shape_checks(self):
        sys = langevin.build_first_order(_params(), _point())
        with pytest.raises(ValidationError):
            dataclasses.replace(sys, M=np.eye(3, dtype=np.complex128))
        with pytest.raises(ValidationError):
            dataclasses.replace(sys, drive=np.zeros(3, dtype=np.complex128))
        with pytest.raises(ValidationError):
            dataclasses.replace(sys, kind="third_order")

    def test_negative_decay_rejected(self):
        sys = langevin.build_first_order(_params(), _point())
        bad = sys.gamma.copy()
        bad[0, 0] = -0.1
        with pytest.raises(ValidationError):
            dataclasses.replace(sys, gamma=bad)
