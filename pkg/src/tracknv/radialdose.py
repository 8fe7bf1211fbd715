"""Delta-ray radial dose around the trajectory, normalized to local stopping.

The kernel is the Katz-family point-target form

    D(r) ~ (1/r^2) * (1 - r/r_max)^(1/alpha),   r_min <= r <= r_max,

with r_max the maximum delta-ray range at the local ion velocity and an
inner cutoff r_min (default 0.3 nm).  The profile is normalized so that
its cylindrical integral equals f_local * S_e(z): the kernel shape carries
the velocity dependence, the table carries the magnitude.  Slower ion ->
smaller r_max -> the same stopping concentrated closer to the axis, which
is what makes the near-axis energy density grow with depth while S_e falls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DoseConfig
from .stopping import StoppingTable, stopping_at_depth

MC2_KEV = 510.99895
AMU_MEV = 931.49410242
DIAMOND_RHO_G_CM3 = 3.52

# Z and mass number for the beams used here; extend as needed.
ION_PROPERTIES = {
    "U": (92, 238.03),
    "Au": (79, 196.97),
    "Xe": (54, 131.29),
    "Pb": (82, 207.2),
}


class DoseRangeError(ValueError):
    """Radius or depth outside the kernel's domain."""


@dataclass(frozen=True)
class IonState:
    """Ion kinematics at one depth along the trajectory."""

    z_um: float
    energy_mev: float
    beta: float
    z_eff: float
    se_kev_nm: float

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta out of (0, 1): {self.beta}")
        if self.z_eff <= 0.0:
            raise ValueError("effective charge must be positive")
        if self.se_kev_nm < 0.0:
            raise ValueError("stopping power must be non-negative")


@dataclass(frozen=True)
class RadialDoseProfile:
    """Dose vs radius at one depth; normalized to f_local * S_e."""

    r_nm: np.ndarray
    dose_ev_nm3: np.ndarray
    f_local: float
    se_kev_nm: float

    def cylindrical_integral(self) -> float:
        """eV/nm of track length: integral of D(r) * 2 pi r dr."""
        return float(np.trapezoid(self.dose_ev_nm3 * 2 * np.pi * self.r_nm,
                                  self.r_nm))


@dataclass(frozen=True)
class EnergyDensityField:
    """Initial electronic energy density over (depth, radius)."""

    z_um: np.ndarray
    r_nm: np.ndarray
    values: np.ndarray  # shape (len(z_um), len(r_nm)), eV/nm^3

    def __post_init__(self):
        if self.values.shape != (len(self.z_um), len(self.r_nm)):
            raise ValueError("field shape mismatch")
        if np.any(self.values < 0):
            raise ValueError("energy density must be non-negative")


def beta_from_energy(energy_mev: float, mass_amu: float) -> float:
    gamma = 1.0 + energy_mev / (mass_amu * AMU_MEV)
    return math.sqrt(max(1.0 - 1.0 / gamma**2, 0.0))


def effective_charge(z1: int, beta: float, scale: float = 125.0) -> float:
    """Barkas-style velocity-dependent effective charge."""
    return z1 * (1.0 - math.exp(-scale * beta / z1 ** (2.0 / 3.0)))


def delta_ray_range_nm(beta: float, rho_g_cm3: float = DIAMOND_RHO_G_CM3) -> float:
    """Maximum delta-ray range (Katz parametrization) at this velocity."""
    b2 = beta * beta
    if b2 >= 1.0 or b2 <= 0.0:
        return 0.0
    w_kev = 2.0 * MC2_KEV * b2 / (1.0 - b2)  # = 2 m c^2 beta^2 gamma^2
    alpha = 1.667 if w_kev < 1.0 else 1.079
    return 6e-6 * w_kev**alpha / rho_g_cm3 * 1e7


def _katz_alpha(beta: float) -> float:
    b2 = beta * beta
    w_kev = 2.0 * MC2_KEV * b2 / (1.0 - b2)
    return 1.667 if w_kev < 1.0 else 1.079


def ion_state_at(table: StoppingTable, z_um: float,
                 z1: int | None = None, mass_amu: float | None = None,
                 charge_scale: float = 125.0) -> IonState:
    """Ion kinematics at depth z from the table's residual energy."""
    if z_um < 0 or z_um > table.range_um:
        raise DoseRangeError(f"depth {z_um} um outside [0, {table.range_um}] um")
    if z1 is None or mass_amu is None:
        try:
            z1, mass_amu = ION_PROPERTIES[table.ion]
        except KeyError:
            raise KeyError(f"unknown ion {table.ion!r}: pass z1 and mass_amu")
    if not math.isfinite(table.energy_mev):
        raise ValueError("table carries no beam energy; cannot integrate E(z)")
    # floor keeps the state physical at the very end of range, where the
    # table's 5% self-consistency band allows E(z) to cross zero
    residual = max(table.energy_mev - table.deposited_up_to(z_um),
                   1e-6 * table.energy_mev)
    beta = beta_from_energy(residual, mass_amu)
    se, _ = stopping_at_depth(table, z_um)
    return IonState(z_um, residual, beta, effective_charge(z1, beta, charge_scale), se)


def _kernel_bounds(state: IonState, cfg: DoseConfig) -> tuple[float, float, float]:
    """(r_min, effective r_max, alpha); r_max floored at 2 r_min so the
    deposit collapses onto the innermost shell when delta rays stop short."""
    r_min = cfg.r_min_nm
    r_max = max(delta_ray_range_nm(state.beta), 2.0 * r_min)
    return r_min, r_max, _katz_alpha(state.beta)


def _shape(r, r_max: float, alpha: float):
    out = np.zeros_like(np.asarray(r, dtype=float))
    r = np.asarray(r, dtype=float)
    inside = (r > 0) & (r < r_max)
    out[inside] = (1.0 / r[inside] ** 2) * (1.0 - r[inside] / r_max) ** (1.0 / alpha)
    return out


def _normalization(r_min: float, r_max: float, alpha: float, n: int) -> float:
    """Integral of shape * 2 pi r dr on a log-spaced grid."""
    r = np.logspace(math.log10(r_min), math.log10(r_max), n)
    return float(np.trapezoid(_shape(r, r_max, alpha) * 2 * np.pi * r, r))


def radial_dose(state: IonState, r_nm, cfg: DoseConfig | None = None):
    """Energy density (eV/nm^3) at radius r from the trajectory.

    Scalar in, scalar out; array in, array out.  Radii outside
    [r_min, r_max] raise DoseRangeError for scalar input.
    """
    cfg = cfg or DoseConfig()
    r_min, r_max, alpha = _kernel_bounds(state, cfg)
    scalar = np.isscalar(r_nm)
    r = np.atleast_1d(np.asarray(r_nm, dtype=float))
    if scalar and (r[0] < r_min or r[0] > r_max):
        raise DoseRangeError(f"radius {r[0]} nm outside [{r_min}, {r_max:.3g}] nm")
    norm = _normalization(r_min, r_max, alpha, cfg.quad_points)
    dose = cfg.f_local * state.se_kev_nm * 1e3 * _shape(r, r_max, alpha) / norm
    dose[r < r_min * (1.0 - 1e-12)] = 0.0
    return float(dose[0]) if scalar else dose


def dose_profile(state: IonState, cfg: DoseConfig | None = None,
                 n_points: int = 256) -> RadialDoseProfile:
    """Log-spaced radial dose profile at one depth."""
    cfg = cfg or DoseConfig()
    r_min, r_max, alpha = _kernel_bounds(state, cfg)
    r = np.logspace(math.log10(r_min), math.log10(r_max * (1 - 1e-9)), n_points)
    return RadialDoseProfile(r, radial_dose(state, r, cfg), cfg.f_local,
                             state.se_kev_nm)


def energy_density_map(table: StoppingTable, z_um, r_nm=None,
                       cfg: DoseConfig | None = None) -> EnergyDensityField:
    """Assemble the (depth, radius) energy-density field column by column.

    Columns beyond the ion range are zero.  The default radial grid is
    log-spaced from r_min to the largest delta-ray range along the track.
    """
    cfg = cfg or DoseConfig()
    z = np.atleast_1d(np.asarray(z_um, dtype=float))
    if np.any(z < 0):
        raise DoseRangeError("depth grid must be non-negative")
    if len(z) < 2 or np.any(np.diff(z) <= 0):
        raise DoseRangeError("depth grid must be strictly increasing")
    if r_nm is None:
        surface = ion_state_at(table, 0.0)
        _, r_top, _ = _kernel_bounds(surface, cfg)
        r_nm = np.logspace(math.log10(cfg.r_min_nm), math.log10(r_top), 256)
    r = np.asarray(r_nm, dtype=float)
    values = np.zeros((len(z), len(r)))
    for i, zi in enumerate(z):
        if zi > table.range_um:
            continue
        state = ion_state_at(table, zi)
        if state.se_kev_nm <= 0.0:
            continue
        values[i] = radial_dose(state, r, cfg)
    return EnergyDensityField(z, r, values)


def iso_contour(field: EnergyDensityField, level: float) -> list[np.ndarray]:
    """Marching-squares iso-contours of the field.

    Returns a list of polylines, each an (n, 2) array with columns
    (z_um, r_nm).  Empty list if the level exceeds the field maximum.
    """
    if level <= 0:
        raise ValueError("contour level must be positive")
    v = field.values
    if level > v.max():
        return []
    z, r = field.z_um, field.r_nm
    segments = []

    def interp(p0, p1, v0, v1):
        t = (level - v0) / (v1 - v0)
        return (p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))

    for i in range(len(z) - 1):
        for j in range(len(r) - 1):
            corners = [(z[i], r[j], v[i, j]), (z[i + 1], r[j], v[i + 1, j]),
                       (z[i + 1], r[j + 1], v[i + 1, j + 1]),
                       (z[i], r[j + 1], v[i, j + 1])]
            idx = sum(1 << k for k, c in enumerate(corners) if c[2] >= level)
            if idx in (0, 15):
                continue
            edges = []  # crossing points on the 4 cell edges
            for k in range(4):
                c0, c1 = corners[k], corners[(k + 1) % 4]
                if (c0[2] >= level) != (c1[2] >= level):
                    edges.append(interp(c0[:2], c1[:2], c0[2], c1[2]))
            if len(edges) == 2:
                segments.append((edges[0], edges[1]))
            elif len(edges) == 4:  # saddle: split by cell-center value
                center = np.mean([c[2] for c in corners])
                if (center >= level) == (corners[0][2] >= level):
                    segments.append((edges[0], edges[3]))
                    segments.append((edges[1], edges[2]))
                else:
                    segments.append((edges[0], edges[1]))
                    segments.append((edges[2], edges[3]))

    return _chain_segments(segments)


def _chain_segments(segments) -> list[np.ndarray]:
    """Join shared endpoints into polylines."""
    def key(p):
        return (round(p[0], 9), round(p[1], 9))

    adjacency: dict = {}
    for a, b in segments:
        adjacency.setdefault(key(a), []).append((a, b))
        adjacency.setdefault(key(b), []).append((b, a))
    used = set()
    polylines = []
    for a, b in segments:
        if (key(a), key(b)) in used or (key(b), key(a)) in used:
            continue
        path = [a, b]
        used.add((key(a), key(b)))
        for grow_end in (True, False):
            while True:
                tip = path[-1] if grow_end else path[0]
                nxt = None
                for p, q in adjacency.get(key(tip), []):
                    pair = (key(p), key(q))
                    if pair in used or (pair[1], pair[0]) in used:
                        continue
                    nxt = q
                    used.add(pair)
                    break
                if nxt is None:
                    break
                if grow_end:
                    path.append(nxt)
                else:
                    path.insert(0, nxt)
        polylines.append(np.array(path))
    return polylines
