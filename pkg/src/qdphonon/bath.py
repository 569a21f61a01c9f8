"""Phonon bath description: couplings, spectral sums, correlation functions.

Two bath families are supported for a two-level emitter (ground state
``|1>``, excited state ``|2>``) in a parabolically confined quantum dot:

* longitudinal acoustic (LA) phonons, deformation-potential coupling with
  linear dispersion ``omega_q = c_s q``;
* longitudinal optical (LO) phonons, Froehlich coupling with a flat
  dispersion ``omega_q = omega_LO``.

The electron/hole envelope functions are ground-state Gaussians of a 3D
harmonic confinement, which gives Gaussian form factors
``exp(-q^2 hbar / (4 m_i omega_i))`` per band.

All momentum sums are evaluated as continuum quadratures
``sum_q -> V/(2pi)^3 * int d^3q``; the quantisation volume cancels
against the 1/V of the squared coupling, so couplings are tabulated for
V = 1 nm^3 and the measure ``q^2/(2 pi^2) dq`` carries the rest.

Couplings are returned as angular frequencies (rad/ps): the energy-space
matrix element is divided by hbar once, here.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import roots_legendre

from .units import HBAR, KB, KG_PER_M3, M_ELECTRON, E2_EPS0

__all__ = [
    "MaterialParams",
    "BathSpec",
    "bose_occupation",
    "la_coupling",
    "lo_coupling",
]


@dataclass(frozen=True)
class MaterialParams:
    """Bulk material and confinement parameters.

    Defaults are GaAs with a small self-assembled dot (electron/hole
    confinement energies 40/20 meV).  Deformation potentials are quoted
    in meV, masses in units of the free electron mass, the mass density
    in kg/m^3, the speed of sound in nm/ps.
    """

    sound_speed: float = 5.11              # nm / ps
    mass_density: float = 5370.0           # kg / m^3
    deformation_potential_e: float = -11.68e3   # meV (conduction band)
    deformation_potential_h: float = -5.38e3    # meV (valence band)
    mass_e: float = 0.063                  # units of m_e
    mass_h: float = 0.45
    confinement_e: float = 40.0            # meV (hbar * omega_e)
    confinement_h: float = 20.0
    lo_energy: float = 36.4                # meV (hbar * omega_LO)
    eps_static: float = 12.53
    eps_infinity: float = 10.9
    temperature: float = 4.0               # K

    def __post_init__(self):
        if self.sound_speed <= 0:
            raise ValueError("sound_speed must be positive")
        if self.mass_density <= 0:
            raise ValueError("mass_density must be positive")
        if self.mass_e <= 0 or self.mass_h <= 0:
            raise ValueError("effective masses must be positive")
        if self.confinement_e <= 0 or self.confinement_h <= 0:
            raise ValueError("confinement energies must be positive")
        if self.lo_energy <= 0:
            raise ValueError("lo_energy must be positive")
        if self.eps_static <= 0 or self.eps_infinity <= 0:
            raise ValueError("dielectric constants must be positive")
        if self.eps_static < self.eps_infinity:
            raise ValueError("eps_static must be >= eps_infinity")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")

    # --- derived quantities -------------------------------------------------

    def localization_length_sq(self, band):
        """Gaussian form-factor length^2 a_i such that F_i(q) = exp(-a_i q^2).

        a_i = hbar^2 / (4 m_i E_i)  with E_i the confinement energy.
        """
        if band == "e":
            m, e = self.mass_e, self.confinement_e
        elif band == "h":
            m, e = self.mass_h, self.confinement_h
        else:
            raise ValueError("band must be 'e' or 'h'")
        return HBAR**2 / (4.0 * m * M_ELECTRON * e)

    def form_factor(self, q, band):
        return np.exp(-self.localization_length_sq(band) * np.asarray(q, float) ** 2)

    @property
    def eps_prime_inv(self):
        """1/eps' = 1/eps_infinity - 1/eps_static (Froehlich contrast)."""
        return 1.0 / self.eps_infinity - 1.0 / self.eps_static

    @property
    def mass_density_internal(self):
        """Mass density in meV ps^2 / nm^5."""
        return self.mass_density * KG_PER_M3


def bose_occupation(omega, temperature):
    """Thermal occupation n(omega) of a mode at angular frequency omega.

    ``omega`` in rad/ps, ``temperature`` in K.  T = 0 returns 0 exactly;
    omega <= 0 raises.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("bose_occupation requires omega > 0")
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0:
        return np.zeros_like(omega) if omega.ndim else 0.0
    x = HBAR * omega / (KB * temperature)
    return 1.0 / np.expm1(x)


def la_coupling(q, mat, band="diff"):
    """Deformation-potential LA coupling g_q in rad/ps (V = 1 nm^3).

    g^q_ii = sqrt(hbar q / (2 rho c_s V)) * D_i * F_i(q) / hbar

    ``band`` selects the electron ('e') or hole ('h') diagonal element or
    the difference element ``g_hh - g_ee`` ('diff') that drives pure
    dephasing of the interband coherence.  The sign of D_i is kept.
    """
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0):
        raise ValueError("la_coupling requires q > 0")
    rho = mat.mass_density_internal
    root = np.sqrt(HBAR * q / (2.0 * rho * mat.sound_speed))
    if band == "e":
        g = root * mat.deformation_potential_e * mat.form_factor(q, "e")
    elif band == "h":
        g = root * mat.deformation_potential_h * mat.form_factor(q, "h")
    elif band == "diff":
        g = root * (mat.deformation_potential_h * mat.form_factor(q, "h")
                    - mat.deformation_potential_e * mat.form_factor(q, "e"))
    else:
        raise ValueError("band must be 'e', 'h' or 'diff'")
    return g / HBAR


def lo_coupling(q, mat, band="diff"):
    """Froehlich LO coupling magnitude |f_q| in rad/ps (V = 1 nm^3).

    |f^q_ii| = sqrt(e^2 hbar omega_LO / (2 V eps0 eps')) * F_i(q) / q / hbar

    with 1/eps' = 1/eps_infinity - 1/eps_static.  The difference element
    ('diff') is ``|f_hh - f_ee|``; since the prefactor is band independent
    only the form factors differ.
    """
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0):
        raise ValueError("lo_coupling requires q > 0")
    pref = np.sqrt(E2_EPS0 * mat.lo_energy * mat.eps_prime_inv / 2.0)
    if band == "e":
        ff = mat.form_factor(q, "e")
    elif band == "h":
        ff = mat.form_factor(q, "h")
    elif band == "diff":
        ff = np.abs(mat.form_factor(q, "h") - mat.form_factor(q, "e"))
    else:
        raise ValueError("band must be 'e', 'h' or 'diff'")
    return pref * ff / q / HBAR


@dataclass(frozen=True)
class BathSpec:
    """Discretised phonon bath: quadrature nodes, weights, couplings.

    ``coupling[k]`` is the (signed, real) coupling of node k in rad/ps,
    ``omega[k]`` its angular frequency, ``weight[k]`` the quadrature
    weight including the continuum measure q^2/(2 pi^2).  Spectral sums
    are then plain dot products, e.g.

        sum_q |g_q|^2 (...)  ->  sum_k weight[k] * coupling[k]^2 (...)
    """

    material: MaterialParams
    kind: str                     # 'la' or 'lo'
    q: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)
    coupling: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)

    # --- constructors -------------------------------------------------------

    @classmethod
    def acoustic(cls, mat=None, n_nodes=2000, form_factor_floor=1e-12,
                 coupling_scale=1.0):
        """LA bath on a Gauss-Legendre q grid.

        The upper cutoff is placed where the slowest-decaying Gaussian
        form factor has fallen below ``form_factor_floor``; beyond that
        the integrand is numerically zero.
        """
        mat = mat if mat is not None else MaterialParams()
        a_min = min(mat.localization_length_sq("e"),
                    mat.localization_length_sq("h"))
        q_max = np.sqrt(np.log(1.0 / form_factor_floor) / a_min)
        x, w = roots_legendre(n_nodes)
        q = 0.5 * q_max * (x + 1.0)
        wq = 0.5 * q_max * w * q**2 / (2.0 * np.pi**2)
        g = coupling_scale * la_coupling(q, mat)
        return cls(material=mat, kind="la", q=q, weight=wq,
                   coupling=g, omega=mat.sound_speed * q)

    @classmethod
    def optical(cls, mat=None, n_nodes=2000, form_factor_floor=1e-12,
                coupling_scale=1.0):
        """LO bath (flat dispersion omega_LO) on a Gauss-Legendre q grid."""
        mat = mat if mat is not None else MaterialParams()
        a_min = min(mat.localization_length_sq("e"),
                    mat.localization_length_sq("h"))
        q_max = np.sqrt(np.log(1.0 / form_factor_floor) / a_min)
        x, w = roots_legendre(n_nodes)
        q = 0.5 * q_max * (x + 1.0)
        wq = 0.5 * q_max * w * q**2 / (2.0 * np.pi**2)
        f = coupling_scale * lo_coupling(q, mat)
        omega_lo = mat.lo_energy / HBAR
        return cls(material=mat, kind="lo", q=q, weight=wq,
                   coupling=f, omega=np.full_like(q, omega_lo))

    def scaled(self, factor):
        """Same bath with all couplings multiplied by ``factor``."""
        return replace(self, coupling=self.coupling * factor)

    def subsampled(self, n_nodes):
        """Coarser Gauss-Legendre discretisation of the same bath.

        Used by the explicit-mode solvers, where a few hundred nodes
        resolve the dynamics but 2000 would dominate the cost.
        """
        ctor = BathSpec.acoustic if self.kind == "la" else BathSpec.optical
        return ctor(self.material, n_nodes=n_nodes)

    # --- spectral sums ------------------------------------------------------

    @property
    def temperature(self):
        return self.material.temperature

    def _occ(self):
        if self.temperature == 0:
            return np.zeros_like(self.omega)
        return bose_occupation(self.omega, self.temperature)

    def spectral_sum(self, values):
        """sum_q weight * values evaluated on the node grid."""
        return self.weight @ values

    def polaron_shift(self):
        """Delta_p = sum_q |g_q|^2 / omega_q  (rad/ps)."""
        return self.weight @ (self.coupling**2 / self.omega)

    def huang_rhys(self):
        """Dimensionless Huang-Rhys factor sum_q |g_q / omega_q|^2."""
        return self.weight @ (self.coupling / self.omega) ** 2

    def displacement_variance(self):
        """phi(0) = sum_q |g_q/omega_q|^2 coth(hbar omega_q / 2 kT).

        Controls the polaron renormalisation exp(-phi(0)/2) of the drive.
        """
        return float(np.real(self.polaron_correlation(0.0)))

    # --- correlation functions ----------------------------------------------

    def ibm_correlation(self, t):
        """Independent-boson phase function phi_I(t) (dimensionless).

        phi_I(t) = sum_q |g_q/omega_q|^2 [ (2 n_q + 1)(1 - cos w t)
                                           + i (w t - sin w t) ]

        Re phi_I saturates at long times (broadband bath); Im phi_I grows
        linearly with slope equal to the polaron shift.
        """
        t = np.asarray(t, dtype=float)
        n = self._occ()
        amp = self.weight * (self.coupling / self.omega) ** 2
        wt = np.multiply.outer(t, self.omega)
        re = ((2.0 * n + 1.0) * amp) @ (1.0 - np.cos(wt)).T
        im = amp @ (wt - np.sin(wt)).T
        out = re + 1j * im
        return out if t.ndim else complex(out)

    def polaron_correlation(self, t):
        """Polaron-frame bath correlation phi(t) (dimensionless).

        phi(t) = sum_q |g_q/omega_q|^2 [ coth(hbar w / 2 kT) cos w t
                                         - i sin w t ]
        """
        t = np.asarray(t, dtype=float)
        n = self._occ()
        amp = self.weight * (self.coupling / self.omega) ** 2
        wt = np.multiply.outer(t, self.omega)
        re = ((2.0 * n + 1.0) * amp) @ np.cos(wt).T
        im = -amp @ np.sin(wt).T
        out = re + 1j * im
        return out if t.ndim else complex(out)

    def memory_kernel(self, t):
        """Bath autocorrelation C(t) = sum_q |g_q|^2 [(2n+1) cos wt - i sin wt].

        Units rad^2/ps^2; the conjugate of the second derivative of
        phi_I, and the kernel of time-convolutionless and path-integral
        treatments: the ordered double integral of C over [0, t]
        reproduces Re phi_I - i Im phi_I.
        """
        t = np.asarray(t, dtype=float)
        n = self._occ()
        amp = self.weight * self.coupling**2
        wt = np.multiply.outer(t, self.omega)
        re = ((2.0 * n + 1.0) * amp) @ np.cos(wt).T
        im = -amp @ np.sin(wt).T
        out = re + 1j * im
        return out if t.ndim else complex(out)

    def collective_coupling_sq(self):
        """sum_q |f_q|^2 for a flat-dispersion bath (rad^2/ps^2).

        For the LO bath all modes share one frequency, so the emitter
        couples to the single collective mode B = sum f_q b_q / |f| with
        effective strength |f| = sqrt(sum |f_q|^2).
        """
        if self.kind != "lo":
            raise ValueError("collective coupling defined for flat (LO) baths")
        return float(self.weight @ self.coupling**2)

    def lo_huang_rhys(self):
        """Huang-Rhys factor of the collective LO mode."""
        if self.kind != "lo":
            raise ValueError("lo_huang_rhys defined for LO baths")
        omega_lo = self.material.lo_energy / HBAR
        return self.collective_coupling_sq() / omega_lo**2

    def zpl_weight(self):
        """Zero-phonon-line weight exp(-Re phi_I(infinity)).

        Re phi_I(inf) = sum_q |g/omega|^2 (2n+1): evaluated directly from
        the plateau of the phase function rather than a long-time limit.
        """
        n = self._occ()
        amp = self.weight * (self.coupling / self.omega) ** 2
        return float(np.exp(-np.sum((2.0 * n + 1.0) * amp)))

    def correlation_time(self, level=0.01):
        """Crude bath memory time: first t where |phi| stays below
        ``level`` * phi(0).  Used for memory-horizon sanity checks."""
        t = np.linspace(0.0, 20.0, 4000)
        phi = np.abs(self.polaron_correlation(t))
        if phi[0] == 0.0:       # zero coupling: no memory at all
            return 0.0
        ref = phi[0]
        below = phi < level * ref
        idx = len(t) - 1
        for k in range(len(t) - 1, -1, -1):
            if not below[k]:
                idx = min(k + 1, len(t) - 1)
                break
        return float(t[idx])
