"""Physical constants and unit conversions used across the package.

Working units: length nm, energy eV, time fs for lattice dynamics
(ns/us/ms for spin traces), temperature K.  Stopping powers are keV/nm,
depths along the beam are um.
"""

import math

# Boltzmann constant, eV/K
KB = 8.617333262e-5

# electron rest energy, keV
ELECTRON_MC2_KEV = 510.99895

# atomic mass unit expressed in eV fs^2 / nm^2 (so that 1/2 m v^2 with
# v in nm/fs comes out in eV)
AMU = 1.03642697e4

# carbon
CARBON_MASS_AMU = 12.011
CARBON_Z = 6

# diamond lattice constant, nm (conventional cubic cell, 8 atoms)
A0 = 0.3567

# diamond mass density, g/cm^3
DIAMOND_RHO_G_CM3 = 3.52


def atomic_density_nm3(a0: float = A0) -> float:
    """Atom number density of diamond in nm^-3 (8 atoms per cubic cell)."""
    return 8.0 / a0**3


def atomic_density_cm3(a0: float = A0) -> float:
    """Atom number density of diamond in cm^-3."""
    return atomic_density_nm3(a0) * 1e21


# canonical diamond atomic density, cm^-3 (= 8/a0^3 for a0 = 0.3567 nm)
N_DIAMOND_CM3 = atomic_density_cm3()

# refractive index of diamond; converts confocal stage travel to probe depth
REFRACTIVE_INDEX = 2.4

# first- and second-neighbor distances of the diamond lattice, nm
FIRST_NEIGHBOR = A0 * math.sqrt(3.0) / 4.0
SECOND_NEIGHBOR = A0 / math.sqrt(2.0)


def ppm_to_cm3(ppm: float, a0: float = A0) -> float:
    """Convert a ppm concentration (relative to diamond sites) to cm^-3."""
    return ppm * (atomic_density_cm3(a0) * 1e-6)


def cm3_to_ppm(n_cm3: float, a0: float = A0) -> float:
    """Convert a number density in cm^-3 to ppm of diamond sites."""
    return n_cm3 / (atomic_density_cm3(a0) * 1e-6)


def ppm_to_nm3(ppm: float, a0: float = A0) -> float:
    """Convert a ppm concentration to nm^-3."""
    return ppm * 1e-6 * atomic_density_nm3(a0)
