"""qdphonon: driven quantum-dot emitters with phonon baths and cavities.

A collection of mutually cross-checking solvers for a two-level
semiconductor emitter coupled to acoustic / optical phonon environments
and, optionally, a cavity mode: exact independent-boson results,
truncated operator hierarchies, polaron master equations, real-time path
integrals, time-convolutionless cavity QED and photon-indistinguishability
estimators -- all in one consistent unit system (meV / ps / nm, hbar = 1).
"""

from .units import HBAR, KB
from .bath import MaterialParams, BathSpec, bose_occupation, la_coupling, lo_coupling
from .drive import DriveProtocol
from .trajectory import Trajectory, SpectrumResult

__all__ = [
    "HBAR",
    "KB",
    "MaterialParams",
    "BathSpec",
    "bose_occupation",
    "la_coupling",
    "lo_coupling",
    "DriveProtocol",
    "Trajectory",
    "SpectrumResult",
]

__version__ = "0.1.0"
