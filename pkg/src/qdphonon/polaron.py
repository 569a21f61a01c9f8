"""Polaron-frame master equations for a cw-driven emitter.

The polaron transform displaces the phonons conditioned on the excited
state, renormalising the (time-independent) Rabi energy by the
Franck-Condon factor <B> = exp(-phi(0)/2) and leaving a residual
fluctuation coupling

    H' = Omega ( X_+ B_x + X_- B_y ),

X_+ = s12 + s21, X_- = i(s21 - s12), X_z = s22 - s11, whose two channels
have the diagonal correlation functions

    <B_x(t) B_x> = <B>^2 G_+(t),   G_+ = cosh phi - 1,
    <B_y(t) B_y> = <B>^2 G_-(t),   G_- = sinh phi.

Second order in H' gives a time-local master equation whose memory
integrand carries the dressed-state back-propagated operators
X_i(-tau) (the "full" solver).  Freezing X_i(-tau) -> X_i collapses the
nine memory kernels onto the two scalar rates

    Gamma_+-(t) = (Obar^2/4) Re int_0^t (e^{+-phi(tau)} - 1) dtau

(the "weak-driving" solver); the two solvers then agree identically,
which is unit-tested.  Gamma_- can transiently be negative at low
temperature (sinh phi < 0 in parts of the window); this is allowed and
surfaced, not clipped.  Positivity of rho is likewise monitored, not
enforced.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp

from .units import HBAR

from .markovian import SIGMA12, SIGMA21, SIGMA22, IDENT, _check_rho, GROUND, \
    _dissipator_super, _hamiltonian_super
from .trajectory import Trajectory

__all__ = ["PolaronFrame", "polaron_transform_constants", "dressed_ops",
           "integrate_polaron_weak", "integrate_polaron_full"]

# documented validity of the weak-driving expansion, meV
WEAK_DRIVE_LIMIT = 0.1

X_PLUS = SIGMA12 + SIGMA21
X_MINUS = 1j * (SIGMA21 - SIGMA12)
X_Z = SIGMA22 - (IDENT - SIGMA22)


@dataclass(frozen=True)
class PolaronFrame:
    """Tabulated polaron-frame quantities for one (bath, Omega) pair."""

    omega: float                 # bare Rabi half-frequency, rad/ps
    omega_bar: float             # renormalized
    polaron_shift: float         # rad/ps
    t: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)       # phi(t) on the table grid
    g_plus: np.ndarray = field(repr=False)    # cosh phi - 1
    g_minus: np.ndarray = field(repr=False)   # sinh phi
    gamma_plus: np.ndarray = field(repr=False)
    gamma_minus: np.ndarray = field(repr=False)

    def eta(self, delta):
        return np.sqrt(4.0 * self.omega**2 + delta**2)

    def rate_plus(self, t):
        return np.interp(t, self.t, self.gamma_plus)

    def rate_minus(self, t):
        return np.interp(t, self.t, self.gamma_minus)


def polaron_transform_constants(bath, omega, t_max=50.0, n_table=4001,
                                drive=None):
    """Build the PolaronFrame tables for a cw drive of half-frequency Omega.

    The transform is only valid for a time-independent Rabi frequency; a
    non-cw ``drive`` is rejected.
    """
    if drive is not None and not drive.is_constant:
        raise ValueError("polaron transform requires a time-independent drive")
    t = np.linspace(0.0, float(t_max), n_table)
    phi = bath.polaron_correlation(t)
    phi0 = float(phi[0].real)
    omega_bar = omega * np.exp(-0.5 * phi0)
    pref = omega_bar**2 / 4.0
    gam_p = pref * cumulative_trapezoid(np.real(np.exp(phi) - 1.0), t, initial=0.0)
    gam_m = pref * cumulative_trapezoid(np.real(np.exp(-phi) - 1.0), t, initial=0.0)
    return PolaronFrame(omega=omega, omega_bar=omega_bar,
                        polaron_shift=bath.polaron_shift(),
                        t=t, phi=phi,
                        g_plus=np.cosh(phi) - 1.0, g_minus=np.sinh(phi),
                        gamma_plus=gam_p, gamma_minus=gam_m)


def dressed_ops(t, omega, delta):
    """Heisenberg rotation of (X_z, X_-, X_+) under H0 = Delta s22 + Omega X_+.

    Returns the 3x3 matrix M(t) with X_i(t) = sum_j M[i, j] X_j(0),
    rows/columns ordered (z, -, +); eta = sqrt(4 Omega^2 + Delta^2).
    M is a proper rotation (orthogonal, det 1).
    """
    eta = np.sqrt(4.0 * omega**2 + delta**2)
    if eta == 0.0:
        return np.eye(3)
    c, s = np.cos(eta * t), np.sin(eta * t)
    o, d = omega, delta
    # N.B. the z-z element is cos + (Delta/eta)^2 (1-cos); the variant
    # with a minus sign sometimes seen in print is not orthogonal and
    # fails the direct-exponentiation check.
    return np.array([
        [c + d**2 / eta**2 * (1 - c), -2 * o / eta * s, 2 * o * d / eta**2 * (1 - c)],
        [2 * o / eta * s,              c,              -d / eta * s],
        [2 * o * d / eta**2 * (1 - c), d / eta * s,    (4 * o**2 + d**2 * c) / eta**2],
    ])


_X = {"z": X_Z, "-": X_MINUS, "+": X_PLUS}
_CHANNELS = ("+", "-")          # fluctuation channels (B_x with X_+, B_y with X_-)
_TARGETS = ("z", "-", "+")


def _pair_superops():
    """vec-form superoperators of the memory dissipator pairs.

    For each (i, j): S1 = X_i X_j rho - X_j rho X_i  (weight K_ij),
                     S2 = rho X_j X_i - X_i rho X_j  (weight K_ij^*).
    """
    out = {}
    for ci in _CHANNELS:
        for cj in _TARGETS:
            xi, xj = _X[ci], _X[cj]
            s1 = np.kron(IDENT, xi @ xj) - np.kron(xi.T, xj)
            s2 = np.kron((xj @ xi).T, IDENT) - np.kron(xj.T, xi)
            out[(ci, cj)] = (s1, s2)
    return out


def _monitor(rho_t):
    herm = max(np.abs(r - r.conj().T).max() for r in rho_t)
    tr = max(abs(np.trace(r) - 1.0) for r in rho_t)
    mineig = min(np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min() for r in rho_t)
    return herm, tr, mineig


def _run(l_of_t, rho0, t_grid):
    def rhs(t, y):
        return l_of_t(t) @ y

    sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), rho0.flatten("F"),
                    t_eval=t_grid, method="DOP853", rtol=1e-9, atol=1e-12)
    if not sol.success:
        raise RuntimeError(f"polaron integration failed: {sol.message}")
    return sol.y.reshape(2, 2, -1, order="F").transpose(2, 0, 1)


def _package(t_grid, rho_t, extra_meta):
    herm, tr, mineig = _monitor(rho_t)
    if mineig < -1e-3:
        raise RuntimeError(
            f"density matrix lost positivity beyond tolerance: min eig {mineig:.2e}")
    meta = {"trace_error": float(tr), "hermiticity_error": float(herm),
            "min_eigenvalue": float(mineig), **extra_meta}
    return Trajectory(t=t_grid,
                      data={"s22": rho_t[:, 1, 1].real, "s12": rho_t[:, 0, 1]},
                      meta=meta)


def integrate_polaron_weak(bath, omega, delta, t_grid, secular=False,
                           renormalize=True, gamma_rad=0.0, rho0=None,
                           frame=None):
    """Weak-driving polaron master equation (frozen dressed propagators).

    drho = -i[Delta s22 + W X_+, rho]
           + 8 Gamma_+(t) (s12 rho s21 + s21 rho s12 - rho)
           + 8 Gamma_-(t) (s12 rho s12 + s21 rho s21)
           [+ radiative (gamma_rad/2) D[s12]]

    with W = Obar (or the bare Omega when ``renormalize=False``, which
    also rescales the rates to Omega^2/4).  ``secular=True`` sets
    Gamma_- to zero.  Documented validity: hbar*Omega below ~0.1 meV.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if HBAR * omega > WEAK_DRIVE_LIMIT:
        warnings.warn(
            f"hbar*Omega = {HBAR * omega:.3f} meV exceeds the documented "
            f"validity of the weak-driving expansion ({WEAK_DRIVE_LIMIT} meV)",
            stacklevel=2)
    rho0 = _check_rho(GROUND if rho0 is None else rho0)
    if frame is None:
        frame = polaron_transform_constants(bath, omega, t_max=max(50.0, t_grid[-1]))
    w_drive = frame.omega_bar if renormalize else omega
    scale = 1.0 if renormalize else (omega / frame.omega_bar) ** 2

    h = delta * SIGMA22 + w_drive * X_PLUS
    l_coh = _hamiltonian_super(h) + 0.5 * gamma_rad * _dissipator_super(SIGMA12)
    # vec forms of the two rate channels
    s_plus = (np.kron(SIGMA12.conj(), SIGMA12) + np.kron(SIGMA21.conj(), SIGMA21)
              - np.kron(IDENT, IDENT))
    s_minus = (np.kron(SIGMA12.conj(), SIGMA21) + np.kron(SIGMA21.conj(), SIGMA12))

    def l_of_t(t):
        gp = scale * frame.rate_plus(t)
        gm = 0.0 if secular else scale * frame.rate_minus(t)
        return l_coh + 8.0 * gp * s_plus + 8.0 * gm * s_minus

    rho_t = _run(l_of_t, rho0, t_grid)
    return _package(t_grid, rho_t,
                    {"omega_bar": frame.omega_bar, "secular": secular,
                     "renormalize": renormalize,
                     "gamma_plus_final": float(frame.rate_plus(t_grid[-1])),
                     "gamma_minus_final": float(frame.rate_minus(t_grid[-1]))})


def integrate_polaron_full(bath, omega, delta, t_grid, gamma_rad=0.0,
                           rho0=None, frame=None, freeze_dressing=False,
                           min_horizon_factor=5.0):
    """Polaron master equation with dressed-state memory kernels.

    The memory integrand carries the back-propagated operators
    X_i(-tau) = sum_j M_ij(-tau) X_j, giving nine kernels
    K_ij(t) = int_0^t G_i(tau) M_ij(-tau) dtau and the dissipator

    drho = ... - Obar^2 sum_ij [ K_ij (X_i X_j rho - X_j rho X_i)
                               + K_ij^* (rho X_j X_i - X_i rho X_j) ].

    ``freeze_dressing=True`` replaces M(-tau) by the identity, which
    reproduces :func:`integrate_polaron_weak` exactly.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    rho0 = _check_rho(GROUND if rho0 is None else rho0)
    t_corr = bath.correlation_time()
    if t_grid[-1] < min_horizon_factor * t_corr:
        raise ValueError(
            f"time window {t_grid[-1]:.2f} ps shorter than "
            f"{min_horizon_factor} x bath correlation time ({t_corr:.2f} ps)")
    if frame is None:
        frame = polaron_transform_constants(bath, omega, t_max=max(50.0, t_grid[-1]))

    tt = frame.t
    g_ch = {"+": frame.g_plus, "-": frame.g_minus}
    ktab = {}
    for ci in _CHANNELS:
        for idx_j, cj in enumerate(_TARGETS):
            if freeze_dressing:
                m = 1.0 if ci == cj else 0.0
                integrand = g_ch[ci] * m
            else:
                idx_i = _TARGETS.index(ci)
                m = np.array([dressed_ops(-tau, frame.omega_bar, delta)[idx_i, idx_j]
                              for tau in tt])
                integrand = g_ch[ci] * m
            ktab[(ci, cj)] = cumulative_trapezoid(integrand, tt, initial=0.0)

    pair_ops = _pair_superops()
    h = delta * SIGMA22 + frame.omega_bar * X_PLUS
    l_coh = _hamiltonian_super(h) + 0.5 * gamma_rad * _dissipator_super(SIGMA12)

    def l_of_t(t):
        liou = l_coh.copy()
        for key, (s1, s2) in pair_ops.items():
            k = np.interp(t, tt, ktab[key].real) + 1j * np.interp(t, tt, ktab[key].imag)
            liou = liou - frame.omega_bar**2 * (k * s1 + np.conj(k) * s2)
        return liou

    rho_t = _run(l_of_t, rho0, t_grid)
    return _package(t_grid, rho_t,
                    {"omega_bar": frame.omega_bar,
                     "freeze_dressing": freeze_dressing})
