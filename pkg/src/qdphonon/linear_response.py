"""Linear response of the undriven emitter: exact independent-boson model.

For vanishing drive the pure-dephasing coupling is exactly solvable: the
interband polarisation after a weak delta excitation is

    P(t) = P(0) exp[ i omega_21 t + i Im phi_I(t) - Re phi_I(t) ]

with the phase function phi_I supplied by :class:`~qdphonon.bath.BathSpec`.
Re phi_I saturates -> a finite zero-phonon-line weight exp(-Re phi_I(inf));
Im phi_I grows linearly -> the polaron shift of the line.  The emission
spectrum is the half-sided Fourier transform of P.
"""

from dataclasses import dataclass

import numpy as np

from .units import HBAR
from .trajectory import SpectrumResult

__all__ = ["EmitterParams", "lorentzian_susceptibility",
           "ibm_polarization", "ibm_lineshape", "sideband_asymmetry"]


@dataclass(frozen=True)
class EmitterParams:
    """Two-level emitter parameters.

    ``gap_energy`` is hbar*omega_21 in meV; rates in 1/ps.  ``detuning``
    is omega_L - omega_21 in rad/ps for driven/rotating-frame solvers.
    """

    gap_energy: float = 1300.0
    radiative_rate: float = 0.0       # Gamma, 1/ps
    pure_dephasing: float = 0.0       # gamma_p, 1/ps
    detuning: float = 0.0             # rad/ps
    dipole_prefactor: float = 1.0     # scales the susceptibility only

    def __post_init__(self):
        if self.gap_energy <= 0:
            raise ValueError("gap_energy must be positive")
        if self.radiative_rate < 0 or self.pure_dephasing < 0:
            raise ValueError("rates must be non-negative")

    @property
    def omega21(self):
        """Transition angular frequency in rad/ps."""
        return self.gap_energy / HBAR


def lorentzian_susceptibility(omega, p, gamma=None):
    """Resonant linear susceptibility of the bare (phonon-free) emitter.

    chi(omega) = pref * i gamma / ((omega - omega_21)^2 + gamma^2)

    ``omega`` in rad/ps; ``gamma`` defaults to the total coherence decay
    Gamma/2 + gamma_p.  The imaginary (absorptive) part is a Lorentzian
    of half width gamma; peak height pref/gamma.
    """
    omega = np.asarray(omega, dtype=float)
    if gamma is None:
        gamma = 0.5 * p.radiative_rate + p.pure_dephasing
    if gamma <= 0:
        raise ValueError("susceptibility needs a positive linewidth")
    return p.dipole_prefactor * 1j * gamma / ((omega - p.omega21) ** 2 + gamma**2)


def ibm_polarization(t, bath, p=None, rotating_frame=True,
                     include_radiative=False):
    """Exact polarisation decay P(t)/P(0) of the independent-boson model.

    In the rotating frame,  P(t) = exp[i Im phi_I(t) - Re phi_I(t)];
    with ``rotating_frame=False`` the free phase exp(i omega_21 t) is
    kept.  ``include_radiative`` multiplies exp(-Gamma t / 2).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    phi = bath.ibm_correlation(t)
    out = np.exp(1j * phi.imag - phi.real)
    if not rotating_frame:
        if p is None:
            raise ValueError("need EmitterParams for the lab-frame phase")
        out = out * np.exp(1j * p.omega21 * t)
    if include_radiative:
        if p is None:
            raise ValueError("need EmitterParams for the radiative rate")
        out = out * np.exp(-0.5 * p.radiative_rate * t)
    return out


def sideband_asymmetry(spec, exclude=1.5):
    """Sideband weight below vs above the ZPL (ratio, dimensionless).

    Integrates the intensity on either side of the spectral maximum,
    excluding a band of half-width ``exclude`` (rad/ps) around it so the
    window-broadened ZPL itself does not contribute.  At low temperature
    the phonon-emission side carries more weight (ratio far from 1);
    with rising temperature stimulated absorption symmetrises the
    sideband and the ratio approaches 1.
    """
    zpl = spec.omega[np.argmax(spec.intensity)]
    lo = spec.omega < zpl - exclude
    hi = spec.omega > zpl + exclude
    w_lo = np.trapezoid(spec.intensity[lo], spec.omega[lo])
    w_hi = np.trapezoid(spec.intensity[hi], spec.omega[hi])
    return float(w_lo / w_hi)


def ibm_lineshape(t, polarization, window="gauss", sigma=None,
                  zpl_weight=None):
    """Emission spectrum S(omega) = Re int_0^inf P(t) e^{-i omega t} dt.

    ``t`` must be uniform and start at 0.  A window is applied before the
    transform to suppress truncation ringing (``gauss`` with
    ``sigma = t[-1]/6`` by default, or ``none``); its width is recorded
    in the result metadata.  The frequency grid is the FFT grid of the
    input; intensities with the ZPL delta broadened by the window.
    """
    t = np.asarray(t, dtype=float)
    pol = np.asarray(polarization, dtype=complex)
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-9) or t[0] != 0.0:
        raise ValueError("need a uniform grid starting at t = 0")
    if window == "gauss":
        if sigma is None:
            sigma = t[-1] / 6.0
        w = np.exp(-0.5 * (t / sigma) ** 2)
    elif window == "none":
        w = np.ones_like(t)
        sigma = np.inf
    else:
        raise ValueError("window must be 'gauss' or 'none'")
    n = len(t)
    nfft = 4 * n   # pad for a denser frequency grid
    f = np.fft.fftfreq(nfft, d=dt)
    omega = 2.0 * np.pi * np.fft.fftshift(f)
    # S(w) = Re sum_k P_k W_k exp(-i w t_k) dt ; endpoint half-weights
    trap = np.ones(n)
    trap[0] = trap[-1] = 0.5
    spec = np.fft.fftshift(np.fft.fft(pol * w * trap, n=nfft)).real * dt
    meta = {"window": window, "sigma": f"{sigma:.6g}"}
    if zpl_weight is not None:
        meta["zpl_weight"] = float(zpl_weight)
    return SpectrumResult(omega=omega, intensity=spec, meta=meta)
