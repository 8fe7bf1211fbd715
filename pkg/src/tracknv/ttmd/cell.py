"""Atom state and diamond-lattice cell construction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..constants import AMU, CARBON_MASS_AMU, KB
from ..rng import RandomStream

# conventional diamond cell: fcc + two-atom basis, 8 sites
_DIAMOND_BASIS = np.array([
    [0.00, 0.00, 0.00], [0.00, 0.50, 0.50],
    [0.50, 0.00, 0.50], [0.50, 0.50, 0.00],
    [0.25, 0.25, 0.25], [0.25, 0.75, 0.75],
    [0.75, 0.25, 0.75], [0.75, 0.75, 0.25],
])


@dataclass
class AtomSystem:
    """Positions/velocities plus the ideal reference lattice for the same cell.

    Units: nm, nm/fs, eV, fs.  Positions stay wrapped into the periodic cell.
    """

    positions: np.ndarray
    velocities: np.ndarray
    cell: np.ndarray
    mass_ev_fs_nm: float
    reference_sites: np.ndarray
    a0_nm: float
    time_fs: float = 0.0

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64)
        self.velocities = np.ascontiguousarray(self.velocities, dtype=np.float64)
        self.cell = np.ascontiguousarray(self.cell, dtype=np.float64)

    @property
    def n_atoms(self) -> int:
        return len(self.positions)

    def wrap(self):
        self.positions -= self.cell * np.floor(self.positions / self.cell)

    def kinetic_energy(self) -> float:
        return float(0.5 * self.mass_ev_fs_nm * np.sum(self.velocities**2))

    def temperature(self) -> float:
        if self.n_atoms == 0:
            return 0.0
        return 2.0 * self.kinetic_energy() / (3.0 * self.n_atoms * KB)

    def momentum(self) -> np.ndarray:
        return self.mass_ev_fs_nm * self.velocities.sum(axis=0)

    def copy(self) -> "AtomSystem":
        return AtomSystem(self.positions.copy(), self.velocities.copy(),
                          self.cell.copy(), self.mass_ev_fs_nm,
                          self.reference_sites, self.a0_nm, self.time_fs)


def maxwell_velocities(n: int, temperature_k: float, mass: float,
                       rng: RandomStream) -> np.ndarray:
    """Maxwell-Boltzmann velocities with zero net momentum."""
    if temperature_k <= 0.0:
        return np.zeros((n, 3))
    sigma = np.sqrt(KB * temperature_k / mass)
    v = rng.generator().normal(0.0, sigma, size=(n, 3))
    v -= v.mean(axis=0)
    return v


def build_diamond_cell(dims_nm, a0_nm: float, temperature_k: float,
                       rng: RandomStream) -> AtomSystem:
    """Perfect diamond lattice filling ``dims_nm`` (rounded to whole cells).

    The reference lattice (ideal site list) is recorded alongside; it is the
    baseline for occupancy-based defect analysis after irradiation.
    """
    dims = np.asarray(dims_nm, dtype=float)
    if np.any(dims <= 0):
        raise ValueError("cell dimensions must be positive")
    counts = np.maximum(np.rint(dims / a0_nm).astype(int), 1)
    cell = counts * a0_nm
    ix, iy, iz = np.meshgrid(np.arange(counts[0]), np.arange(counts[1]),
                             np.arange(counts[2]), indexing="ij")
    origins = np.stack([ix, iy, iz], axis=-1).reshape(-1, 1, 3)
    sites = (origins + _DIAMOND_BASIS) * a0_nm
    sites = sites.reshape(-1, 3)
    mass = CARBON_MASS_AMU * AMU
    vel = maxwell_velocities(len(sites), temperature_k, mass, rng)
    return AtomSystem(sites.copy(), vel, cell.astype(float), mass,
                      sites.copy(), a0_nm)
