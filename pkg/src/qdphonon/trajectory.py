"""Result containers and CSV serialisation.

CSV files written by the library are deterministic: a block of ``#``
provenance header lines (key = value, sorted), then a header row, then
data in ``%.12g``.  Readers skip the provenance block.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Trajectory", "SpectrumResult", "write_csv", "read_csv"]


@dataclass
class Trajectory:
    """Time series on a common grid.

    ``data`` maps column name -> array over ``t``.  Complex observables
    are stored as complex arrays and split into re/im columns on export.
    """

    t: np.ndarray
    data: dict
    meta: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.data[key]

    def columns(self):
        return list(self.data)

    def _flat_columns(self):
        cols = {}
        for name, arr in self.data.items():
            arr = np.asarray(arr)
            if np.iscomplexobj(arr):
                cols[f"{name}_re"] = arr.real
                cols[f"{name}_im"] = arr.imag
            else:
                cols[name] = arr
        return cols

    def to_csv(self, path, provenance=None):
        cols = {"t": self.t, **self._flat_columns()}
        write_csv(path, cols, provenance={**self.meta, **(provenance or {})})


@dataclass
class SpectrumResult:
    """Emission spectrum on an angular-frequency grid (rad/ps)."""

    omega: np.ndarray
    intensity: np.ndarray
    coherent_weight: float = 0.0
    peaks: list = field(default_factory=list)   # (position, height) pairs
    meta: dict = field(default_factory=dict)

    def find_peaks(self, window=None, prominence=None):
        """Local maxima as (omega, height), optionally inside ``window``."""
        from scipy.signal import find_peaks
        om, s = self.omega, self.intensity
        if window is not None:
            sel = (om >= window[0]) & (om <= window[1])
            om, s = om[sel], s[sel]
        if prominence is None:
            prominence = 1e-3 * (s.max() - s.min() + 1e-300)
        idx, _ = find_peaks(s, prominence=prominence)
        return [(float(om[i]), float(s[i])) for i in idx]

    def to_csv(self, path, provenance=None):
        cols = {"omega": self.omega, "intensity": self.intensity}
        prov = {**self.meta, **(provenance or {}),
                "coherent_weight": f"{self.coherent_weight:.12g}"}
        write_csv(path, cols, provenance=prov)


def write_csv(path, columns, provenance=None):
    """Write named columns with a sorted ``#`` provenance header."""
    names = list(columns)
    arrays = [np.asarray(columns[n], dtype=float) for n in names]
    n = len(arrays[0])
    for name, arr in zip(names, arrays):
        if arr.shape != (n,):
            raise ValueError(f"column {name!r} has shape {arr.shape}, expected ({n},)")
    with open(path, "w") as fh:
        for key in sorted(provenance or {}):
            fh.write(f"# {key} = {(provenance or {})[key]}\n")
        fh.write(",".join(names) + "\n")
        for row in zip(*arrays):
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


def read_csv(path):
    """Read a CSV written by :func:`write_csv`.

    Returns (columns: dict[str, ndarray], provenance: dict[str, str]).
    """
    prov = {}
    with open(path) as fh:
        line = fh.readline()
        while line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, val = body.partition("=")
                prov[key.strip()] = val.strip()
            line = fh.readline()
        names = [s.strip() for s in line.strip().split(",")]
        rows = [list(map(float, ln.strip().split(","))) for ln in fh if ln.strip()]
    arr = np.asarray(rows, dtype=float).reshape(len(rows), len(names))
    return {name: arr[:, k] for k, name in enumerate(names)}, prov
