"""Velocity-Verlet integration with persistent neighbor lists.

The integrator owns the neighbor list and rebuilds it when any atom has
moved more than half the skin since the last build.  Pure-NVE spans (and
NVE plus the boundary Berendsen shell) run as fused numba chunks; the
electronically coupled phase advances step by step from ``ttm.py``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..constants import KB
from .cell import AtomSystem
from .tersoff import ForceError, TersoffParams, build_neighbors, tersoff_kernel

SKIN_NM = 0.10
MAX_NEIGHBORS = 64


@njit(cache=True)
def _max_disp2(pos, ref, cell):
    worst = 0.0
    for i in range(pos.shape[0]):
        d2 = 0.0
        for a in range(3):
            dx = pos[i, a] - ref[i, a]
            dx -= cell[a] * round(dx / cell[a])
            d2 += dx * dx
        if d2 > worst:
            worst = d2
    return worst


@njit(cache=True)
def _nve_chunk(pos, vel, cell, mass, dt, n_steps, params, nbrs, counts,
               pos_ref, pe, forces, skin,
               shell_nm, tau_fs, t_target, max_nb):
    """Advance n_steps of velocity Verlet; optional Berendsen boundary shell.

    Returns (steps_done, status, removed_energy, nbrs, counts).
    status: 0 ok, 1 neighbor overflow, 2 hard-core contact.
    """
    n = pos.shape[0]
    removed = 0.0
    half = 0.5 * dt / mass
    trigger = (0.5 * skin) ** 2
    r_list = params[12] + params[13] + skin
    for step in range(n_steps):
        for i in range(n):
            for a in range(3):
                vel[i, a] += half * forces[i, a]
                x = pos[i, a] + dt * vel[i, a]
                # one step never moves an atom by more than a cell length
                if x >= cell[a]:
                    x -= cell[a]
                elif x < 0.0:
                    x += cell[a]
                pos[i, a] = x
        if _max_disp2(pos, pos_ref, cell) > trigger:
            nbrs, counts, st = build_neighbors(pos, cell, r_list, max_nb)
            if st != 0:
                return step, 1, removed, nbrs, counts
            pos_ref[:, :] = pos
        _, st = tersoff_kernel(pos, cell, nbrs, counts, params, pe, forces)
        if st != 0:
            return step, st, removed, nbrs, counts
        for i in range(n):
            for a in range(3):
                vel[i, a] += half * forces[i, a]

        if shell_nm > 0.0:
            # Berendsen rescale of the boundary shell toward t_target
            ke = 0.0
            count = 0
            for i in range(n):
                x = pos[i, 0]
                y = pos[i, 1]
                in_shell = (x < shell_nm or x > cell[0] - shell_nm
                            or y < shell_nm or y > cell[1] - shell_nm)
                if in_shell:
                    ke += 0.5 * mass * (vel[i, 0] ** 2 + vel[i, 1] ** 2
                                        + vel[i, 2] ** 2)
                    count += 1
            if count > 0 and ke > 0.0:
                t_shell = 2.0 * ke / (3.0 * count * KB)
                lam2 = 1.0 + dt / tau_fs * (t_target / t_shell - 1.0)
                if lam2 < 0.0:
                    lam2 = 0.0
                lam = math.sqrt(lam2)
                for i in range(n):
                    x = pos[i, 0]
                    y = pos[i, 1]
                    if (x < shell_nm or x > cell[0] - shell_nm
                            or y < shell_nm or y > cell[1] - shell_nm):
                        vel[i, 0] *= lam
                        vel[i, 1] *= lam
                        vel[i, 2] *= lam
                removed += ke * (1.0 - lam * lam)
    return n_steps, 0, removed, nbrs, counts


class MdEngine:
    """Owns the mutable state of one simulation cell."""

    def __init__(self, system: AtomSystem, params: TersoffParams, dt_fs: float):
        if params.r_cut >= system.cell.min() / 2.0:
            raise ValueError("potential cutoff must be below half the "
                             "smallest cell dimension")
        self.system = system
        self.params = params
        self.dt = dt_fs
        self._ptuple = params.as_tuple()
        self.pe = np.zeros(system.n_atoms)
        self.forces = np.zeros_like(system.positions)
        self._pos_at_build = system.positions.copy()
        self._rebuild_neighbors()
        self._compute_forces()

    def _rebuild_neighbors(self):
        r_list = self.params.r_cut + SKIN_NM
        self.nbrs, self.counts, st = build_neighbors(
            self.system.positions, self.system.cell, r_list, MAX_NEIGHBORS)
        if st != 0:
            raise ForceError("neighbor list overflow")
        self._pos_at_build[:] = self.system.positions

    def _maybe_rebuild(self):
        d2 = _max_disp2(self.system.positions, self._pos_at_build,
                        self.system.cell)
        if d2 > (0.5 * SKIN_NM) ** 2:
            self._rebuild_neighbors()

    def _compute_forces(self):
        _, st = tersoff_kernel(self.system.positions, self.system.cell,
                               self.nbrs, self.counts, self._ptuple,
                               self.pe, self.forces)
        if st == 2:
            raise ForceError("atom pair inside hard-core distance")

    def potential_energy(self) -> float:
        return float(self.pe.sum())

    def total_energy(self) -> float:
        return self.potential_energy() + self.system.kinetic_energy()

    def step(self, n_steps: int = 1, boundary_shell_nm: float = 0.0,
             boundary_tau_fs: float = 100.0, boundary_t_k: float = 300.0) -> float:
        """Advance NVE (plus optional boundary thermostat) for n_steps.

        Returns the energy removed by the thermostat (eV).
        """
        sys_ = self.system
        done = 0
        removed_total = 0.0
        while done < n_steps:
            todo = n_steps - done
            steps, st, removed, self.nbrs, self.counts = _nve_chunk(
                sys_.positions, sys_.velocities, sys_.cell, sys_.mass_ev_fs_nm,
                self.dt, todo, self._ptuple, self.nbrs, self.counts,
                self._pos_at_build, self.pe, self.forces, SKIN_NM,
                boundary_shell_nm, boundary_tau_fs, boundary_t_k, MAX_NEIGHBORS)
            done += steps
            removed_total += removed
            if st == 1:
                raise ForceError("neighbor list overflow")
            if st == 2:
                raise ForceError("atom pair inside hard-core distance; "
                                 "reduce the timestep or the deposited dose")
        sys_.time_fs += n_steps * self.dt
        return removed_total

    def half_kick_drift(self):
        """First half of velocity Verlet (used by the coupled TTM step)."""
        sys_ = self.system
        sys_.velocities += 0.5 * self.dt / sys_.mass_ev_fs_nm * self.forces
        sys_.positions += self.dt * sys_.velocities
        sys_.wrap()
        self._maybe_rebuild()
        self._compute_forces()
        sys_.velocities += 0.5 * self.dt / sys_.mass_ev_fs_nm * self.forces
        sys_.time_fs += self.dt


def step_nve(system: AtomSystem, dt_fs: float, params: TersoffParams,
             n_steps: int = 1) -> AtomSystem:
    """One-shot NVE advance (convenience around MdEngine for small studies)."""
    engine = MdEngine(system, params, dt_fs)
    engine.step(n_steps)
    return engine.system
