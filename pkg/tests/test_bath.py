"""Bath couplings, spectral sums, correlation functions.

Reference values were frozen from an independent adaptive-quadrature
evaluation (scipy.integrate.quad over the continuum measure) of the same
physical formulas, written separately from the library's Gauss-Legendre
spectral-sum machinery.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdphonon.bath import (MaterialParams, BathSpec, bose_occupation,
                           la_coupling, lo_coupling)
from qdphonon.units import HBAR, KB


MAT = MaterialParams()


def test_default_material_is_gaas():
    assert MAT.sound_speed == pytest.approx(5.11)
    assert MAT.eps_prime_inv == pytest.approx(1 / 10.9 - 1 / 12.53)
    # form-factor lengths follow from hbar^2/(4 m E)
    assert MAT.localization_length_sq("e") == pytest.approx(7.559488, rel=1e-5)
    assert MAT.localization_length_sq("h") == pytest.approx(2.116657, rel=1e-5)


def test_material_validation():
    with pytest.raises(ValueError):
        MaterialParams(sound_speed=-1.0)
    with pytest.raises(ValueError):
        MaterialParams(temperature=-0.1)
    with pytest.raises(ValueError):
        MaterialParams(eps_static=9.0, eps_infinity=10.0)


def test_la_coupling_reference_value():
    # frozen from the independent quadrature oracle
    assert la_coupling(1.0, MAT) == pytest.approx(-1.3517315190583645, rel=1e-10)
    # difference element is hole - electron
    assert la_coupling(1.0, MAT) == pytest.approx(
        la_coupling(1.0, MAT, "h") - la_coupling(1.0, MAT, "e"), rel=1e-12)


def test_la_coupling_small_q_sqrt_behaviour():
    # form factors -> 1, so g ~ sqrt(q) * (D_h - D_e)
    q = 1e-6
    expect = np.sqrt(HBAR * q / (2 * MAT.mass_density_internal * MAT.sound_speed)) \
        * (MAT.deformation_potential_h - MAT.deformation_potential_e) / HBAR
    assert la_coupling(q, MAT) == pytest.approx(expect, rel=1e-9)


def test_la_coupling_rejects_nonpositive_q():
    with pytest.raises(ValueError):
        la_coupling(0.0, MAT)
    with pytest.raises(ValueError):
        la_coupling(np.array([0.5, -1.0]), MAT)


def test_lo_coupling_reference_value():
    assert lo_coupling(0.5, MAT) == pytest.approx(83.43837492065121, rel=1e-10)


def test_lo_coupling_vanishes_without_dielectric_contrast():
    mat = MaterialParams(eps_static=10.9, eps_infinity=10.9)
    assert lo_coupling(0.5, mat) == 0.0


def test_bose_occupation_values():
    w = 36.4 / HBAR
    assert bose_occupation(w, 4.0) == pytest.approx(1.3741005475592949e-46, rel=1e-8)
    assert bose_occupation(w, 300.0) == pytest.approx(0.3238517689240116, rel=1e-12)
    assert bose_occupation(w, 0.0) == 0.0


def test_bose_occupation_detailed_balance():
    w = 2.0
    t = 30.0
    n = bose_occupation(w, t)
    assert (n + 1) / n == pytest.approx(np.exp(HBAR * w / (KB * t)), rel=1e-12)


@given(w=st.floats(0.05, 20.0), t=st.floats(2.0, 400.0))
@settings(max_examples=60, deadline=None)
def test_bose_occupation_monotonic_in_temperature(w, t):
    # restricted to hbar w / kT where n(w) has not underflowed to zero
    assert bose_occupation(w, 1.5 * t) > bose_occupation(w, t) >= 0.0


class TestAcousticBath:
    BATH = BathSpec.acoustic(MAT)

    def test_polaron_shift(self):
        # [oracle: adaptive quadrature of q^2/(2 pi^2) g^2/omega]
        assert self.BATH.polaron_shift() == pytest.approx(0.028608339766088432, rel=1e-8)

    def test_displacement_variance(self):
        assert self.BATH.displacement_variance() == pytest.approx(
            0.0196533842142331, rel=1e-7)
        b77 = BathSpec.acoustic(MaterialParams(temperature=77.0))
        assert b77.displacement_variance() == pytest.approx(
            0.2637724528725806, rel=1e-7)

    def test_zpl_weight(self):
        assert self.BATH.zpl_weight() == pytest.approx(0.9805384845286759, rel=1e-7)
        # equals the long-time plateau of exp(-Re phi_I)
        plateau = np.exp(-self.BATH.ibm_correlation(40.0).real)
        assert self.BATH.zpl_weight() == pytest.approx(plateau, rel=1e-9)

    def test_ibm_correlation_reference_points(self):
        val = self.BATH.ibm_correlation(np.array([0.5, 1.0]))
        assert val[0].real == pytest.approx(0.008843269894707037, rel=1e-7)
        assert val[0].imag == pytest.approx(0.006356315371211301, rel=1e-7)
        assert val[1].real == pytest.approx(0.013510879175731513, rel=1e-7)
        assert val[1].imag == pytest.approx(0.02683230937601345, rel=1e-7)

    def test_ibm_correlation_zero_at_origin(self):
        assert self.BATH.ibm_correlation(0.0) == 0.0

    def test_ibm_imaginary_slope_is_polaron_shift(self):
        # Im phi_I(t) -> Delta_p * t + const at long times
        t1, t2 = 20.0, 30.0
        slope = (self.BATH.ibm_correlation(t2).imag
                 - self.BATH.ibm_correlation(t1).imag) / (t2 - t1)
        assert slope == pytest.approx(self.BATH.polaron_shift(), rel=1e-6)

    def test_memory_kernel_reference_points(self):
        c0 = self.BATH.memory_kernel(0.0)
        assert c0.real == pytest.approx(0.09974951482089338, rel=1e-7)
        assert c0.imag == 0.0
        c3 = self.BATH.memory_kernel(0.3)
        assert c3.real == pytest.approx(0.03629993561539496, rel=1e-7)
        assert c3.imag == pytest.approx(-0.08567354618329705, rel=1e-7)

    def test_memory_kernel_is_conjugate_curvature_of_phase(self):
        # C(t) = conj(d^2 phi_I / dt^2)
        t = np.linspace(0.4, 0.8, 5)
        h = t[1] - t[0]
        phi = self.BATH.ibm_correlation(t)
        d2 = (phi[:-2] - 2 * phi[1:-1] + phi[2:]) / h**2
        ck = self.BATH.memory_kernel(t[1:-1])
        assert np.allclose(np.conj(d2), ck, rtol=3e-2)

    def test_polaron_correlation_symmetry(self):
        # phi(-t) = phi(t)^*
        t = np.array([0.2, 0.7, 1.9])
        assert np.allclose(self.BATH.polaron_correlation(-t),
                           np.conj(self.BATH.polaron_correlation(t)))

    def test_coupling_scale(self):
        half = BathSpec.acoustic(MAT, coupling_scale=0.5)
        assert half.polaron_shift() == pytest.approx(
            0.25 * self.BATH.polaron_shift(), rel=1e-12)
        zero = BathSpec.acoustic(MAT, coupling_scale=0.0)
        assert zero.displacement_variance() == 0.0
        assert np.all(zero.ibm_correlation(np.linspace(0, 5, 7)) == 0.0)

    def test_quadrature_converged(self):
        coarse = BathSpec.acoustic(MAT, n_nodes=500)
        assert coarse.polaron_shift() == pytest.approx(
            self.BATH.polaron_shift(), rel=1e-10)


class TestOpticalBath:
    BATH = BathSpec.optical(MAT)

    def test_flat_dispersion(self):
        assert np.all(self.BATH.omega == MAT.lo_energy / HBAR)

    def test_collective_coupling(self):
        assert self.BATH.collective_coupling_sq() == pytest.approx(
            40.83497592092962, rel=1e-7)

    def test_huang_rhys(self):
        assert self.BATH.lo_huang_rhys() == pytest.approx(
            0.01335245340586056, rel=1e-7)

    def test_la_bath_rejects_lo_accessors(self):
        la = BathSpec.acoustic(MAT)
        with pytest.raises(ValueError):
            la.collective_coupling_sq()
        with pytest.raises(ValueError):
            la.lo_huang_rhys()

    def test_lo_correlation_is_periodic(self):
        # single-frequency bath: phi(t + T) = phi(t), T = 2 pi / omega_LO
        period = 2 * np.pi * HBAR / MAT.lo_energy
        t = np.array([0.0, 0.013, 0.05])
        assert np.allclose(self.BATH.polaron_correlation(t),
                           self.BATH.polaron_correlation(t + period), rtol=1e-9)


@given(temp=st.floats(1.0, 200.0))
@settings(max_examples=20, deadline=None)
def test_displacement_variance_grows_with_temperature(temp):
    a = BathSpec.acoustic(MaterialParams(temperature=temp), n_nodes=300)
    b = BathSpec.acoustic(MaterialParams(temperature=1.3 * temp), n_nodes=300)
    assert b.displacement_variance() > a.displacement_variance()


@given(t=st.floats(0.01, 30.0))
@settings(max_examples=40, deadline=None)
def test_re_phi_I_nonnegative(t):
    bath = BathSpec.acoustic(MAT, n_nodes=500)
    assert bath.ibm_correlation(t).real >= 0.0
