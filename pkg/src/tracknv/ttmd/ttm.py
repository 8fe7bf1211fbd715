"""Electronic-temperature grid and electron-phonon coupling.

The grid is 2-D over the cell cross-section (the track runs along z and the
deposit is z-invariant within a slab).  Diffusion is explicit FTCS with
CFL-respecting sub-cycling; exchange with the lattice is Langevin
friction/noise per grid zone, with the realized kinetic-energy change
charged to the local electronic energy so the ledger closes by
construction.  Coupling is gated to zones noticeably above ambient, which
keeps near-equilibrium zones from being overdrawn by noise fluctuations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..constants import KB
from ..config import TtmConfig
from .cell import AtomSystem

GATE_K = 50.0  # coupling active where T_e exceeds ambient by this much


@dataclass
class ElectronicGrid:
    """Electronic temperature field over the (x, y) cross-section."""

    te: np.ndarray             # (ngx, ngy) K
    dx_nm: float
    lz_nm: float
    ce: float                  # eV / nm^3 / K
    kappa: float               # eV / nm / fs / K
    g: float                   # eV / nm^3 / fs / K
    ambient_k: float
    absorbing: bool = True     # Dirichlet at ambient vs insulating edges

    @classmethod
    def for_cell(cls, cell_nm, cfg: TtmConfig, ambient_k: float,
                 absorbing: bool = True) -> "ElectronicGrid":
        ngx = max(int(round(cell_nm[0] / cfg.grid_dx_nm)), 3)
        ngy = max(int(round(cell_nm[1] / cfg.grid_dx_nm)), 3)
        # keep zones square-ish and exactly tiling the cell
        dx = float(cell_nm[0]) / ngx
        ngy = max(int(round(cell_nm[1] / dx)), 3)
        te = np.full((ngx, ngy), ambient_k)
        return cls(te, dx, float(cell_nm[2]), cfg.ce_ev_nm3_k,
                   cfg.kappa_ev_nm_fs_k, cfg.g_ev_nm3_fs_k, ambient_k,
                   absorbing)

    @property
    def zone_volume(self) -> float:
        return self.dx_nm * self.dx_nm * self.lz_nm

    def total_energy(self) -> float:
        """Electronic energy relative to T_e = 0, eV."""
        return float(self.te.sum()) * self.ce * self.zone_volume

    def excess_energy(self) -> float:
        """Electronic energy above ambient, eV."""
        return (float(self.te.sum()) - self.te.size * self.ambient_k) \
            * self.ce * self.zone_volume

    def deposit(self, energy_ev: np.ndarray):
        """Add per-zone energy (eV) to the electronic field."""
        if energy_ev.shape != self.te.shape:
            raise ValueError("source shape mismatch")
        self.te += energy_ev / (self.ce * self.zone_volume)

    def diffuse(self, dt_fs: float) -> float:
        """Advance diffusion by dt; returns energy lost through the boundary."""
        if self.kappa <= 0.0:
            return 0.0
        diffusivity = self.kappa / self.ce
        n_sub = max(1, int(math.ceil(dt_fs * diffusivity
                                     / (0.20 * self.dx_nm**2))))
        dt_sub = dt_fs / n_sub
        alpha = diffusivity * dt_sub / self.dx_nm**2
        before = self.te.sum()
        for _ in range(n_sub):
            if self.absorbing:
                padded = np.pad(self.te, 1, constant_values=self.ambient_k)
            else:
                padded = np.pad(self.te, 1, mode="edge")
            lap = (padded[2:, 1:-1] + padded[:-2, 1:-1] + padded[1:-1, 2:]
                   + padded[1:-1, :-2] - 4.0 * self.te)
            self.te += alpha * lap
        lost = (before - self.te.sum()) * self.ce * self.zone_volume
        return float(lost)


@njit(cache=True)
def _couple_zones(pos, vel, mass, noise, te, dx, ngx, ngy, g, dt, ambient,
                  gate, ce_dv, lz):
    """Langevin exchange between atoms and their electronic zone.

    Friction strength per zone follows from g and the local atom count, so
    the expected energy flow is g * (T_e - T_lattice) * V_zone.  Returns
    (energy to lattice, clamp residual).
    """
    n = pos.shape[0]
    dke = np.zeros((ngx, ngy))
    counts = np.zeros((ngx, ngy), dtype=np.int64)
    for i in range(n):
        zx = min(int(pos[i, 0] / dx), ngx - 1)
        zy = min(int(pos[i, 1] / dx), ngy - 1)
        counts[zx, zy] += 1
    for i in range(n):
        zx = min(int(pos[i, 0] / dx), ngx - 1)
        zy = min(int(pos[i, 1] / dx), ngy - 1)
        t_e = te[zx, zy]
        if t_e <= ambient + gate:
            continue
        n_zone = counts[zx, zy]
        # g * V_zone = 3 N_zone kB gamma  (per-zone energy balance)
        gamma = g * (dx * dx * lz) / (3.0 * n_zone * KB)
        damp = gamma * dt
        if damp > 0.5:
            damp = 0.5  # keep the explicit update stable under extreme g
        sd = math.sqrt(2.0 * gamma * KB * t_e * dt / mass)
        ke0 = 0.5 * mass * (vel[i, 0] ** 2 + vel[i, 1] ** 2 + vel[i, 2] ** 2)
        for a in range(3):
            vel[i, a] = vel[i, a] * (1.0 - damp) + sd * noise[i, a]
        ke1 = 0.5 * mass * (vel[i, 0] ** 2 + vel[i, 1] ** 2 + vel[i, 2] ** 2)
        dke[zx, zy] += ke1 - ke0
    to_lattice = 0.0
    residual = 0.0
    for zx in range(ngx):
        for zy in range(ngy):
            if dke[zx, zy] != 0.0:
                to_lattice += dke[zx, zy]
                te[zx, zy] -= dke[zx, zy] / ce_dv
                if te[zx, zy] < 0.0:
                    residual += -te[zx, zy] * ce_dv
                    te[zx, zy] = 0.0
    return to_lattice, residual


def couple(system: AtomSystem, grid: ElectronicGrid, dt_fs: float,
           noise: np.ndarray) -> tuple[float, float]:
    """Apply one electron-phonon exchange step.

    Returns (energy transferred to the lattice, clamped residual), both eV.
    ``noise`` must be standard-normal of shape (n_atoms, 3) drawn from the
    segment's random stream.
    """
    if grid.g <= 0.0:
        return 0.0, 0.0
    return _couple_zones(system.positions, system.velocities,
                         system.mass_ev_fs_nm, noise, grid.te, grid.dx_nm,
                         grid.te.shape[0], grid.te.shape[1], grid.g, dt_fs,
                         grid.ambient_k, GATE_K,
                         grid.ce * grid.zone_volume, grid.lz_nm)


def zone_source_from_profile(grid: ElectronicGrid, dose_at_r,
                             r_min_nm: float, subsamples: int = 4) -> np.ndarray:
    """Per-zone deposit energies (eV) for a radial dose profile.

    ``dose_at_r`` maps radius (nm) to eV/nm^3; radii inside the kernel's
    inner cutoff evaluate at the cutoff.  The track axis sits at the center
    of the cross-section.
    """
    ngx, ngy = grid.te.shape
    cx = 0.5 * ngx * grid.dx_nm
    cy = 0.5 * ngy * grid.dx_nm
    offs = (np.arange(subsamples) + 0.5) / subsamples * grid.dx_nm
    energy = np.zeros((ngx, ngy))
    for zx in range(ngx):
        xs = zx * grid.dx_nm + offs
        for zy in range(ngy):
            ys = zy * grid.dx_nm + offs
            rx = xs[:, None] - cx
            ry = ys[None, :] - cy
            r = np.maximum(np.hypot(rx, ry), r_min_nm)
            energy[zx, zy] = float(np.mean(dose_at_r(r))) * grid.zone_volume
    return energy
