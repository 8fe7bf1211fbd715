"""Swift-heavy-ion track damage and NV-center formation toolkit for diamond.

Subsystems: stopping-power table ingestion, delta-ray radial dose kernels,
two-temperature molecular dynamics of the carbon lattice, Wigner-Seitz
defect census, kinetic Monte Carlo annealing into NV centers, PL spectrum
deconvolution, ODMR trace fitting, and quasi-1D chain statistics.
"""

__version__ = "0.1.0"
