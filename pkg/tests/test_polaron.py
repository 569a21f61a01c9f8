"""Polaron-frame solvers: dressed operators, rates, weak/full consistency."""

import numpy as np
import pytest
from scipy.linalg import expm

from qdphonon.bath import MaterialParams, BathSpec
from qdphonon.drive import DriveProtocol
from qdphonon.polaron import (X_MINUS, X_PLUS, X_Z, dressed_ops,
                              integrate_polaron_full, integrate_polaron_weak,
                              polaron_transform_constants)
from qdphonon.units import HBAR

BATH77 = BathSpec.acoustic(MaterialParams(temperature=77.0), n_nodes=400)
BATH4 = BathSpec.acoustic(MaterialParams(temperature=4.0), n_nodes=400)
ZERO_BATH = BathSpec.acoustic(MaterialParams(temperature=4.0), n_nodes=50,
                              coupling_scale=0.0)
OMEGA_50UEV = 0.050 / HBAR


@pytest.fixture(scope="module")
def frame77():
    return polaron_transform_constants(BATH77, OMEGA_50UEV)


class TestDressedOps:
    def test_identity_at_t0(self):
        assert np.allclose(dressed_ops(0.0, 1.3, 0.7), np.eye(3), atol=1e-14)

    def test_resonant_invariant(self):
        # at Delta = 0 the drive operator X_+ commutes with H_0
        m = dressed_ops(2.7, 0.9, 0.0)
        assert np.allclose(m[2], [0.0, 0.0, 1.0], atol=1e-14)

    def test_orthogonal_rotation(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            o, d, t = rng.uniform(0.1, 3), rng.uniform(-2, 2), rng.uniform(0, 9)
            m = dressed_ops(t, o, d)
            assert np.abs(m @ m.T - np.eye(3)).max() < 1e-12
            assert abs(np.linalg.det(m) - 1.0) < 1e-12

    def test_matches_direct_exponentiation(self):
        ops = [X_Z, X_MINUS, X_PLUS]
        rng = np.random.default_rng(11)
        for _ in range(20):
            o, d, t = rng.uniform(0.1, 3), rng.uniform(-2, 2), rng.uniform(0, 9)
            u = expm(1j * t * (np.diag([0.0, d]) + o * X_PLUS))
            m = dressed_ops(t, o, d)
            for i in range(3):
                exact = u @ ops[i] @ u.conj().T
                recon = sum(m[i, j] * ops[j] for j in range(3))
                assert np.abs(exact - recon).max() < 1e-12


class TestTransformConstants:
    def test_zero_coupling(self):
        fr = polaron_transform_constants(ZERO_BATH, 0.5)
        assert fr.omega_bar == pytest.approx(0.5)
        assert np.allclose(fr.g_plus, 0.0, atol=1e-14)
        assert np.allclose(fr.g_minus, 0.0, atol=1e-14)
        assert np.allclose(fr.gamma_plus, 0.0, atol=1e-14)

    def test_renormalization_fixture(self, frame77):
        # Franck-Condon factor exp(-phi(0)/2) at 77 K, GaAs defaults
        assert frame77.omega_bar / frame77.omega == pytest.approx(
            0.8764407, rel=1e-5)
        assert frame77.polaron_shift == pytest.approx(0.028608340, rel=1e-6)

    def test_renormalization_monotone_in_temperature(self):
        ratios = []
        for temp in (4.0, 30.0, 77.0, 150.0):
            bath = BathSpec.acoustic(MaterialParams(temperature=temp),
                                     n_nodes=200)
            fr = polaron_transform_constants(bath, 1.0)
            assert 0.0 < fr.omega_bar <= 1.0
            ratios.append(fr.omega_bar)
        assert np.all(np.diff(ratios) < 0.0)

    def test_rates_start_at_zero(self, frame77):
        assert frame77.gamma_plus[0] == 0.0
        assert frame77.gamma_minus[0] == 0.0

    def test_rates_plateau(self, frame77):
        # constant within 1% over the final 20% of the tabulated window
        t_hi = frame77.t[-1]
        lo = frame77.rate_plus(0.8 * t_hi)
        hi = frame77.rate_plus(t_hi)
        assert abs(hi - lo) <= 0.01 * abs(hi)

    def test_rate_fixtures(self, frame77):
        assert frame77.rate_plus(50.0) == pytest.approx(5.000386e-4, rel=1e-4)
        assert frame77.rate_minus(50.0) == pytest.approx(-4.229075e-4, rel=1e-4)

    def test_rejects_pulsed_drive(self):
        pulse = DriveProtocol("gaussian", 0.5, t0=2.0, tau=1.0)
        with pytest.raises(ValueError, match="time-independent"):
            polaron_transform_constants(BATH4, 0.5, drive=pulse)


class TestWeakSolver:
    def test_zero_coupling_rabi(self):
        om = 0.9
        t = np.linspace(0, 10, 201)
        traj = integrate_polaron_weak(ZERO_BATH, om, 0.0, t)
        assert np.allclose(traj["s22"], np.sin(om * t) ** 2, atol=1e-8)

    def test_trace_and_hermiticity(self, frame77):
        t = np.linspace(0, 50, 101)
        traj = integrate_polaron_weak(BATH77, OMEGA_50UEV, 0.3, t,
                                      frame=frame77)
        assert traj.meta["trace_error"] < 1e-10
        assert traj.meta["hermiticity_error"] < 1e-12

    def test_strong_drive_warns(self):
        t = np.linspace(0, 2, 21)
        with pytest.warns(UserWarning, match="weak-driving"):
            integrate_polaron_weak(BATH4, 1.0, 0.0, t)

    def test_secular_drops_gamma_minus(self, frame77):
        t = np.linspace(0, 50, 101)
        sec = integrate_polaron_weak(BATH77, OMEGA_50UEV, 0.0, t,
                                     secular=True, frame=frame77)
        full = integrate_polaron_weak(BATH77, OMEGA_50UEV, 0.0, t,
                                      secular=False, frame=frame77)
        assert np.abs(sec["s22"] - full["s22"]).max() > 1e-4

    def test_population_fixture(self, frame77):
        t = np.linspace(0, 50, 201)
        traj = integrate_polaron_weak(BATH77, OMEGA_50UEV, 0.0, t,
                                      frame=frame77)
        assert traj["s22"][-1].real == pytest.approx(0.1252357, abs=2e-4)


class TestFullSolver:
    def test_frozen_dressing_reproduces_weak(self, frame77):
        t = np.linspace(0, 50, 101)
        weak = integrate_polaron_weak(BATH77, OMEGA_50UEV, 0.0, t,
                                      frame=frame77)
        froz = integrate_polaron_full(BATH77, OMEGA_50UEV, 0.0, t,
                                      freeze_dressing=True, frame=frame77)
        assert np.abs(weak["s22"] - froz["s22"]).max() < 1e-8

    def test_dressing_changes_dynamics(self, frame77):
        t = np.linspace(0, 50, 101)
        weak = integrate_polaron_weak(BATH77, OMEGA_50UEV, 0.0, t,
                                      frame=frame77)
        full = integrate_polaron_full(BATH77, OMEGA_50UEV, 0.0, t,
                                      frame=frame77)
        assert np.abs(weak["s22"] - full["s22"]).max() > 1e-3

    def test_unitary_dressed_precession(self):
        om, d = 0.8, 0.6
        eta = np.hypot(2 * om, d)
        t = np.linspace(0, 12, 241)
        traj = integrate_polaron_full(ZERO_BATH, om, d, t)
        expect = 4 * om**2 / eta**2 * np.sin(eta * t / 2) ** 2
        assert np.allclose(traj["s22"], expect, atol=1e-7)

    def test_short_window_rejected(self):
        t = np.linspace(0, 1.0, 11)
        with pytest.raises(ValueError, match="correlation time"):
            integrate_polaron_full(BATH4, 0.1, 0.0, t)

    def test_detuning_asymmetry_at_4k(self):
        # phonon emission assists driving above the polaron-shifted line
        om = 0.1 / HBAR
        fr = polaron_transform_constants(BATH4, om, t_max=120.0)
        t = np.linspace(0, 120, 241)
        d = 0.1 / HBAR
        lo = integrate_polaron_full(BATH4, om, -d, t, gamma_rad=0.002,
                                    frame=fr)
        hi = integrate_polaron_full(BATH4, om, +d, t, gamma_rad=0.002,
                                    frame=fr)
        assert lo["s22"][-1].real > hi["s22"][-1].real + 0.01
