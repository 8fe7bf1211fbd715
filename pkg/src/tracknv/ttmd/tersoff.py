"""Tersoff bond-order potential: parameters, neighbor lists, energy, forces.

The force kernel is a serial scatter over directed pairs so results are
bit-reproducible regardless of thread count; parallelism in this package
lives at the segment level, not inside the force loop.  Forces are exact
analytic gradients of the energy (checked against finite differences in
the test suite).
"""

from __future__ import annotations

import importlib.resources
import math
import sys
from dataclasses import dataclass

import numpy as np
from numba import njit

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

HARD_CORE_NM = 0.03  # closer approaches signal blown-up dynamics


class ForceError(RuntimeError):
    """Raised when the force evaluation detects unphysical geometry."""


@dataclass(frozen=True)
class TersoffParams:
    a_ev: float
    b_ev: float
    lambda1_nm: float
    lambda2_nm: float
    lambda3_nm: float
    m: float
    beta: float
    n: float
    c: float
    d: float
    h: float
    gamma: float
    cutoff_r_nm: float
    cutoff_d_nm: float

    @property
    def r_cut(self) -> float:
        """Outer cutoff radius (nm)."""
        return self.cutoff_r_nm + self.cutoff_d_nm

    def as_tuple(self):
        return (self.a_ev, self.b_ev, self.lambda1_nm, self.lambda2_nm,
                self.lambda3_nm, self.m, self.beta, self.n, self.c, self.d,
                self.h, self.gamma, self.cutoff_r_nm, self.cutoff_d_nm)


def load_tersoff_params(path=None) -> TersoffParams:
    """Load the potential parameter set (defaults to the bundled carbon file)."""
    if path is None:
        text = (importlib.resources.files("tracknv.data")
                / "tersoff_C.toml").read_text(encoding="utf-8")
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    data = tomllib.loads(text)["tersoff"]
    return TersoffParams(**data)


@njit(cache=True)
def _wrap(pos, cell):
    for i in range(pos.shape[0]):
        for a in range(3):
            pos[i, a] -= cell[a] * math.floor(pos[i, a] / cell[a])


@njit(cache=True)
def build_neighbors(pos, cell, r_list, max_nb):
    """Full Verlet neighbor list via cell binning (brute force for tiny boxes).

    Returns (neighbors (N, max_nb) int32, counts (N,) int32, status) with
    status 0 on success, 1 on neighbor overflow.
    """
    n = pos.shape[0]
    nbrs = np.full((n, max_nb), -1, dtype=np.int32)
    counts = np.zeros(n, dtype=np.int32)
    r2max = r_list * r_list
    ncx = max(int(cell[0] / r_list), 1)
    ncy = max(int(cell[1] / r_list), 1)
    ncz = max(int(cell[2] / r_list), 1)
    if ncx < 3 or ncy < 3 or ncz < 3:
        # brute force with minimum image
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                dx = pos[j, 0] - pos[i, 0]
                dy = pos[j, 1] - pos[i, 1]
                dz = pos[j, 2] - pos[i, 2]
                dx -= cell[0] * round(dx / cell[0])
                dy -= cell[1] * round(dy / cell[1])
                dz -= cell[2] * round(dz / cell[2])
                if dx * dx + dy * dy + dz * dz <= r2max:
                    if counts[i] >= max_nb:
                        return nbrs, counts, 1
                    nbrs[i, counts[i]] = j
                    counts[i] += 1
        return nbrs, counts, 0

    return _build_neighbors_cells(pos, cell, r_list, max_nb, nbrs, counts,
                                  ncx, ncy, ncz)


@njit(cache=True)
def _build_neighbors_cells(pos, cell, r_list, max_nb, nbrs, counts,
                           ncx, ncy, ncz):
    n = pos.shape[0]
    r2max = r_list * r_list
    hx = 0.5 * cell[0]
    hy = 0.5 * cell[1]
    hz = 0.5 * cell[2]

    ncell = ncx * ncy * ncz
    head = np.full(ncell, -1, dtype=np.int32)
    nxt = np.full(n, -1, dtype=np.int32)
    atom_cell = np.empty(n, dtype=np.int32)
    for i in range(n):
        cx = min(int(pos[i, 0] / cell[0] * ncx), ncx - 1)
        cy = min(int(pos[i, 1] / cell[1] * ncy), ncy - 1)
        cz = min(int(pos[i, 2] / cell[2] * ncz), ncz - 1)
        cid = (cx * ncy + cy) * ncz + cz
        atom_cell[i] = cid
        nxt[i] = head[cid]
        head[cid] = i

    # wrapped 27-cell adjacency, built once per rebuild
    adj = np.empty((ncell, 27), dtype=np.int32)
    for cx in range(ncx):
        for cy in range(ncy):
            for cz in range(ncz):
                cid = (cx * ncy + cy) * ncz + cz
                q = 0
                for ox in range(-1, 2):
                    wx = (cx + ox) % ncx
                    for oy in range(-1, 2):
                        wy = (cy + oy) % ncy
                        for oz in range(-1, 2):
                            adj[cid, q] = ((wx * ncy + wy) * ncz
                                           + (cz + oz) % ncz)
                            q += 1

    for i in range(n):
        xi = pos[i, 0]
        yi = pos[i, 1]
        zi = pos[i, 2]
        cid = atom_cell[i]
        for q in range(27):
            j = head[adj[cid, q]]
            while j >= 0:
                if j != i:
                    dx = pos[j, 0] - xi
                    if dx > hx:
                        dx -= cell[0]
                    elif dx < -hx:
                        dx += cell[0]
                    dy = pos[j, 1] - yi
                    if dy > hy:
                        dy -= cell[1]
                    elif dy < -hy:
                        dy += cell[1]
                    dz = pos[j, 2] - zi
                    if dz > hz:
                        dz -= cell[2]
                    elif dz < -hz:
                        dz += cell[2]
                    if dx * dx + dy * dy + dz * dz <= r2max:
                        if counts[i] >= max_nb:
                            return nbrs, counts, 1
                        nbrs[i, counts[i]] = j
                        counts[i] += 1
                j = nxt[j]
    return nbrs, counts, 0


@njit(cache=True, fastmath=True)
def tersoff_kernel(pos, cell, nbrs, counts, params, pe, forces):
    """Energy and analytic forces; returns (min pair distance, status).

    status: 0 ok, 2 hard-core violation.  ``pe`` gets per-atom energies
    (half of each directed pair assigned to its center atom).
    """
    (a_ev, b_ev, lam1, lam2, lam3, m_exp, beta, n_exp, c, d, h, gamma,
     r_c, d_c) = params
    n = pos.shape[0]
    pe[:] = 0.0
    forces[:, :] = 0.0
    c2 = c * c
    d2 = d * d
    beta_n = beta ** n_exp
    inv_2n = -1.0 / (2.0 * n_exp)
    pi4d = math.pi / (4.0 * d_c)
    rmax = r_c + d_c
    min_r = 1e30

    # scratch for the local environment of atom i
    max_nb = nbrs.shape[1]
    lux = np.empty(max_nb)
    luy = np.empty(max_nb)
    luz = np.empty(max_nb)
    lr = np.empty(max_nb)
    lfc = np.empty(max_nb)
    ldfc = np.empty(max_nb)
    lidx = np.empty(max_nb, dtype=np.int32)
    # per-k cache shared between the bond-order pass and the force pass
    kcos = np.empty(max_nb)
    kg = np.empty(max_nb)
    kdg = np.empty(max_nb)
    kee = np.empty(max_nb)
    kdee = np.empty(max_nb)

    hx = 0.5 * cell[0]
    hy = 0.5 * cell[1]
    hz = 0.5 * cell[2]
    rmax2 = rmax * rmax
    status = 0
    for i in range(n):
        nloc = 0
        xi = pos[i, 0]
        yi = pos[i, 1]
        zi = pos[i, 2]
        for q in range(counts[i]):
            j = nbrs[i, q]
            # positions are wrapped, so one branch gives the minimum image
            dx = pos[j, 0] - xi
            if dx > hx:
                dx -= cell[0]
            elif dx < -hx:
                dx += cell[0]
            dy = pos[j, 1] - yi
            if dy > hy:
                dy -= cell[1]
            elif dy < -hy:
                dy += cell[1]
            dz = pos[j, 2] - zi
            if dz > hz:
                dz -= cell[2]
            elif dz < -hz:
                dz += cell[2]
            dist2 = dx * dx + dy * dy + dz * dz
            if dist2 >= rmax2:
                continue
            r = math.sqrt(dist2)
            if r < min_r:
                min_r = r
            if r < HARD_CORE_NM:
                status = 2
            # cutoff function and derivative
            if r < r_c - d_c:
                fc = 1.0
                dfc = 0.0
            else:
                s = math.pi / 2.0 * (r - r_c) / d_c
                fc = 0.5 - 0.5 * math.sin(s)
                dfc = -pi4d * math.cos(s)
            inv_r = 1.0 / r
            lux[nloc] = dx * inv_r
            luy[nloc] = dy * inv_r
            luz[nloc] = dz * inv_r
            lr[nloc] = r
            lfc[nloc] = fc
            ldfc[nloc] = dfc
            lidx[nloc] = j
            nloc += 1

        for jj in range(nloc):
            j = lidx[jj]
            r_ij = lr[jj]
            ux = lux[jj]
            uy = luy[jj]
            uz = luz[jj]
            fc_ij = lfc[jj]
            dfc_ij = ldfc[jj]
            f_r = a_ev * math.exp(-lam1 * r_ij)
            f_a = -b_ev * math.exp(-lam2 * r_ij)
            df_r = -lam1 * f_r
            df_a = -lam2 * f_a

            # bond order from the angular environment
            zeta = 0.0
            for kk in range(nloc):
                if kk == jj:
                    continue
                cosv = ux * lux[kk] + uy * luy[kk] + uz * luz[kk]
                hcos = h - cosv
                denom = d2 + hcos * hcos
                inv_den = 1.0 / denom
                gval = gamma * (1.0 + c2 / d2 - c2 * inv_den)
                if lam3 != 0.0:
                    dr = r_ij - lr[kk]
                    ee = math.exp((lam3 * dr) ** m_exp)
                    dee = ee * m_exp * lam3 ** m_exp * dr ** (m_exp - 1.0)
                else:
                    ee = 1.0
                    dee = 0.0
                kcos[kk] = cosv
                kg[kk] = gval
                kdg[kk] = -2.0 * gamma * c2 * hcos * inv_den * inv_den
                kee[kk] = ee
                kdee[kk] = dee
                zeta += lfc[kk] * gval * ee

            if zeta > 1e-30:
                bn = beta_n * zeta ** n_exp
                b_ij = (1.0 + bn) ** inv_2n
                dbdz = (-0.5 * beta_n * zeta ** (n_exp - 1.0)
                        * (1.0 + bn) ** (inv_2n - 1.0))
            else:
                b_ij = 1.0
                dbdz = 0.0

            pe[i] += 0.5 * fc_ij * (f_r + b_ij * f_a)

            # radial part at fixed bond order
            dvdr = 0.5 * (dfc_ij * (f_r + b_ij * f_a)
                          + fc_ij * (df_r + b_ij * df_a))
            forces[i, 0] += dvdr * ux
            forces[i, 1] += dvdr * uy
            forces[i, 2] += dvdr * uz
            forces[j, 0] -= dvdr * ux
            forces[j, 1] -= dvdr * uy
            forces[j, 2] -= dvdr * uz

            pref = 0.5 * fc_ij * f_a * dbdz
            if pref == 0.0:
                continue

            # chain rule through zeta
            fix = 0.0
            fiy = 0.0
            fiz = 0.0
            for kk in range(nloc):
                if kk == jj:
                    continue
                k = lidx[kk]
                r_ik = lr[kk]
                vx = lux[kk]
                vy = luy[kk]
                vz = luz[kk]
                cosv = kcos[kk]

                # d cos / d positions
                inv_rij = 1.0 / r_ij
                inv_rik = 1.0 / r_ik
                djx = (vx - cosv * ux) * inv_rij
                djy = (vy - cosv * uy) * inv_rij
                djz = (vz - cosv * uz) * inv_rij
                dkx = (ux - cosv * vx) * inv_rik
                dky = (uy - cosv * vy) * inv_rik
                dkz = (uz - cosv * vz) * inv_rik

                w_ang = lfc[kk] * kdg[kk] * kee[kk]
                # radial pieces: d zeta / d r_ij and d r_ik
                w_rij = lfc[kk] * kg[kk] * kdee[kk]
                w_rik = ldfc[kk] * kg[kk] * kee[kk] - w_rij

                gjx = w_ang * djx + w_rij * ux
                gjy = w_ang * djy + w_rij * uy
                gjz = w_ang * djz + w_rij * uz
                gkx = w_ang * dkx + w_rik * vx
                gky = w_ang * dky + w_rik * vy
                gkz = w_ang * dkz + w_rik * vz

                forces[j, 0] -= pref * gjx
                forces[j, 1] -= pref * gjy
                forces[j, 2] -= pref * gjz
                forces[k, 0] -= pref * gkx
                forces[k, 1] -= pref * gky
                forces[k, 2] -= pref * gkz
                fix += gjx + gkx
                fiy += gjy + gky
                fiz += gjz + gkz
            forces[i, 0] += pref * fix
            forces[i, 1] += pref * fiy
            forces[i, 2] += pref * fiz

    return min_r, status


def tersoff_energy_forces(system, params: TersoffParams,
                          neighbors=None) -> tuple[float, np.ndarray]:
    """Total potential energy (eV) and per-atom forces (eV/nm).

    Convenience wrapper building a fresh neighbor list; the MD engine keeps
    its own persistent list.
    """
    from .cell import AtomSystem  # local import to avoid a cycle
    assert isinstance(system, AtomSystem)
    if neighbors is None:
        nbrs, counts, st = build_neighbors(system.positions, system.cell,
                                           params.r_cut + 0.1, 64)
        if st != 0:
            raise ForceError("neighbor list overflow")
    else:
        nbrs, counts = neighbors
    pe = np.empty(len(system.positions))
    forces = np.empty_like(system.positions)
    _, status = tersoff_kernel(system.positions, system.cell, nbrs, counts,
                               params.as_tuple(), pe, forces)
    if status == 2:
        raise ForceError(f"atom pair closer than {HARD_CORE_NM} nm; "
                         "dynamics have blown up")
    return float(pe.sum()), forces
