"""Optical drive envelopes.

The driving Hamiltonian in the rotating frame is
``H_L(t) = Omega(t) (|1><2| + |2><1|)``; the Rabi rotation angle of a
pulse is therefore ``area = int 2 Omega(t) dt``, so a pi pulse has
``area = pi``.

``amplitude`` means:

* ``cw``       -- the constant Rabi half-frequency Omega in rad/ps;
* ``gaussian`` -- dimensionless pulse strength Omega_L in the envelope
                  Omega(t) = Omega_L sqrt(pi/(2 tau^2)) exp(-(t-t0)^2/(2 tau^2)),
                  whose area is 2 pi Omega_L;
* ``delta``    -- the rotation angle itself (instantaneous kick);
* ``two_pulse``-- as ``gaussian``, repeated after ``separation``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

__all__ = ["DriveProtocol"]

_KINDS = ("cw", "gaussian", "delta", "two_pulse")


@dataclass(frozen=True)
class DriveProtocol:
    kind: str = "cw"
    amplitude: float = 0.0
    t0: float = 0.0          # pulse centre (ps); ignored for cw
    tau: float = 1.0         # gaussian width (ps)
    separation: float = 0.0  # two_pulse centre-to-centre delay (ps)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown drive kind {self.kind!r}")
        if self.kind in ("gaussian", "two_pulse") and self.tau <= 0:
            raise ValueError("gaussian drive requires tau > 0")
        if self.kind == "two_pulse" and self.separation <= 0:
            raise ValueError("two_pulse drive requires separation > 0")

    @classmethod
    def from_area(cls, kind, area, **kw):
        """Build a drive from its rotation angle ``area = int 2 Omega dt``."""
        if kind == "cw":
            raise ValueError("a cw drive has no finite area")
        if kind == "delta":
            return cls(kind="delta", amplitude=area, **kw)
        return cls(kind=kind, amplitude=area / (2.0 * np.pi), **kw)

    def _gauss(self, t, t0):
        tau = self.tau
        return (self.amplitude * np.sqrt(np.pi / (2.0 * tau**2))
                * np.exp(-((t - t0) ** 2) / (2.0 * tau**2)))

    def omega(self, t):
        """Instantaneous Rabi half-frequency Omega(t) in rad/ps."""
        t = np.asarray(t, dtype=float)
        if self.kind == "cw":
            out = np.full_like(t, self.amplitude)
        elif self.kind == "gaussian":
            out = self._gauss(t, self.t0)
        elif self.kind == "two_pulse":
            out = self._gauss(t, self.t0) + self._gauss(t, self.t0 + self.separation)
        else:  # delta: representable only through kicks / slice areas
            out = np.zeros_like(t)
        return out if out.ndim else float(out)

    def area(self):
        """Total rotation angle int 2 Omega dt (radians)."""
        if self.kind == "cw":
            raise ValueError("a cw drive has no finite area")
        if self.kind == "delta":
            return self.amplitude
        n = 2 if self.kind == "two_pulse" else 1
        return n * 2.0 * np.pi * self.amplitude

    def slice_area(self, t0, t1):
        """Half-angle f = int_t0^t1 Omega dt of one propagation slice."""
        if self.kind == "cw":
            return self.amplitude * (t1 - t0)
        if self.kind == "delta":
            # the kick is treated as located at self.t0
            half = 0.5 * self.amplitude
            return half if (t0 <= self.t0 < t1) else 0.0
        centres = [self.t0]
        if self.kind == "two_pulse":
            centres.append(self.t0 + self.separation)
        s = np.sqrt(2.0) * self.tau
        total = 0.0
        for tc in centres:
            total += (self.amplitude * np.pi / 2.0
                      * (erf((t1 - tc) / s) - erf((t0 - tc) / s)))
        return float(total)

    @property
    def is_zero(self):
        return self.kind != "delta" and self.amplitude == 0.0

    @property
    def is_constant(self):
        return self.kind == "cw"
