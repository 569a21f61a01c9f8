"""Internal unit system and physical constants.

Everything inside the library runs in a single consistent system:

* energy   -- meV
* time     -- ps
* length   -- nm
* hbar = 1 for all dynamical equations; energies are converted to
  angular frequencies (rad/ps) by dividing by ``HBAR`` once, at the
  boundary where parameters enter a solver.

Derived conversion factors used when material constants are quoted in
SI or mixed units (mass densities in kg/m^3, masses in units of the
free-electron mass, deformation potentials in eV).
"""

# hbar in meV * ps  (CODATA: 6.582119569e-16 eV s)
HBAR = 0.6582119569

# Boltzmann constant in meV / K
KB = 0.08617333262

# free electron mass in meV * ps^2 / nm^2
# (m_e c^2 = 510998.95 eV = 5.1099895e8 meV, c = 2.99792458e5 nm / ps)
M_ELECTRON = 5.1099895e8 / (2.99792458e5) ** 2

# 1 kg/m^3 expressed in meV * ps^2 / nm^5
# (1 J = 6.241509074e21 meV, 1 s^2 = 1e24 ps^2, 1 m^5 = 1e45 nm^5)
KG_PER_M3 = 6.241509074

# Coulomb coupling constant e^2 / (4 pi eps0) in meV * nm
#   e^2/(4 pi eps0) = 1.44 eV nm  (fine-structure alpha * hbar c)
E2_4PI_EPS0 = 1.43996454e3

# e^2 / eps0 in meV * nm  (the combination entering the Froehlich
# matrix element written without the 4*pi absorbed)
E2_EPS0 = 4.0 * 3.141592653589793 * E2_4PI_EPS0


def energy_to_angular(energy_mev):
    """meV -> rad/ps."""
    return energy_mev / HBAR


def angular_to_energy(omega_rad_ps):
    """rad/ps -> meV."""
    return omega_rad_ps * HBAR


def thermal_energy(temperature_k):
    """k_B T in meV."""
    return KB * temperature_k
