"""Stopping-power tables: ingestion, interpolation, range, vacancy rates.

Tables are externally produced (SRIM-style) depth profiles.  The package
bundles reference tables for 1.1 GeV U and 0.95 GeV Au in diamond under
``tracknv/data/``; see ``scripts/gen_stopping_tables.py`` for their
provenance and the README for the column format.  To convert raw SRIM
output: evaluate SRIM's stopping at the residual energy E(z) on a depth
grid (dE/dz integration) and emit ``z_um, Se_keV_per_nm, Sn_keV_per_nm,
vac_per_nm`` rows; the vacancy column is SRIM's vacancies/ion/nm (or a
Kinchin-Pease estimate from S_n).
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import numpy as np


class TableFormatError(ValueError):
    """Malformed stopping table text."""


_COLUMNS = ("z_um", "Se_keV_per_nm", "Sn_keV_per_nm", "vac_per_nm")


@dataclass(frozen=True)
class StoppingTable:
    """Depth-indexed electronic/nuclear stopping for one ion/target pair.

    Depths are um, stopping powers keV/nm, vacancy rates 1/nm.  The grid is
    strictly increasing, starts at 0 and extends at least to the range.
    """

    ion: str
    energy_mev: float
    z_um: np.ndarray
    se_kev_nm: np.ndarray
    sn_kev_nm: np.ndarray
    vac_per_nm: np.ndarray
    range_um: float = field(init=False)

    def __post_init__(self):
        z = self.z_um
        if z.ndim != 1 or len(z) < 2:
            raise TableFormatError("need at least two depth rows")
        if z[0] != 0.0:
            raise TableFormatError("depth grid must start at 0")
        if np.any(np.diff(z) <= 0):
            i = int(np.argmax(np.diff(z) <= 0))
            raise TableFormatError(f"depth grid not strictly increasing at row {i + 2}")
        for name in ("se_kev_nm", "sn_kev_nm", "vac_per_nm"):
            col = getattr(self, name)
            if col.shape != z.shape:
                raise TableFormatError(f"column {name} length mismatch")
            if np.any(col < 0):
                raise TableFormatError(f"negative value in column {name}")
        total = self.se_kev_nm + self.sn_kev_nm
        nonzero = np.nonzero(total > 0)[0]
        r = float(z[nonzero[-1]]) if len(nonzero) else 0.0
        object.__setattr__(self, "range_um", r)

    def energy_balance(self) -> float:
        """Integrated energy loss over the nominal beam energy.

        keV/nm integrated over um gives MeV directly.
        """
        deposited = float(np.trapezoid(self.se_kev_nm + self.sn_kev_nm, self.z_um))
        return deposited / self.energy_mev

    def deposited_up_to(self, z_um: float) -> float:
        """Energy (MeV) lost between the surface and depth z."""
        if z_um <= 0:
            return 0.0
        z = min(z_um, float(self.z_um[-1]))
        grid = self.z_um
        i = int(np.searchsorted(grid, z))
        zs = np.append(grid[:i], z)
        tot = self.se_kev_nm + self.sn_kev_nm
        vals = np.append(tot[:i], np.interp(z, grid, tot))
        return float(np.trapezoid(vals, zs))


def parse_stopping_table(text: str, ion: str = "unknown",
                         energy_mev: float = float("nan")) -> StoppingTable:
    """Parse the documented whitespace/CSV table format.

    Comment lines start with '#'; '# key=value' entries may carry ion and
    energy metadata.  The first non-comment line is the column header; rows
    follow with 3 or 4 numeric columns (the vacancy column is optional).
    """
    meta = {"ion": ion, "energy_mev": energy_mev}
    rows = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    key, _, value = token.partition("=")
                    if key == "ion":
                        meta["ion"] = value
                    elif key == "energy_mev":
                        meta["energy_mev"] = float(value)
            continue
        if not header_seen:
            header_seen = True
            continue
        parts = line.replace(",", " ").split()
        if len(parts) not in (3, 4):
            raise TableFormatError(f"line {lineno}: expected 3 or 4 columns, "
                                   f"got {len(parts)}")
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise TableFormatError(f"line {lineno}: non-numeric value") from exc
        if len(values) == 3:
            values.append(0.0)
        rows.append(values)
    if not header_seen:
        raise TableFormatError("missing column header line")
    if len(rows) < 2:
        raise TableFormatError("need at least two data rows")
    arr = np.array(rows, dtype=float)
    return StoppingTable(meta["ion"], meta["energy_mev"],
                         arr[:, 0].copy(), arr[:, 1].copy(),
                         arr[:, 2].copy(), arr[:, 3].copy())


BUNDLED = ("U_diamond", "Au_diamond")


def load_bundled(name: str) -> StoppingTable:
    """Load a bundled reference table and assert its energy balance."""
    if name not in BUNDLED:
        raise KeyError(f"no bundled stopping table {name!r}; have {BUNDLED}")
    text = (importlib.resources.files("tracknv.data")
            / f"stopping_{name}.csv").read_text(encoding="utf-8")
    table = parse_stopping_table(text)
    balance = table.energy_balance()
    if not 0.95 <= balance <= 1.05:
        raise TableFormatError(
            f"bundled table {name}: energy balance {balance:.3f} outside 5%")
    return table


def load_table(name_or_path: str) -> StoppingTable:
    """Resolve a bundled table name or a filesystem path."""
    if name_or_path in BUNDLED:
        return load_bundled(name_or_path)
    with open(name_or_path, "r", encoding="utf-8") as fh:
        return parse_stopping_table(fh.read())


def stopping_at_depth(table: StoppingTable, z_um: float) -> tuple[float, float]:
    """(S_e, S_n) in keV/nm at depth z, linearly interpolated, 0 beyond range."""
    if z_um < 0:
        raise ValueError("depth must be non-negative")
    if z_um > table.range_um:
        return (0.0, 0.0)
    se = float(np.interp(z_um, table.z_um, table.se_kev_nm))
    sn = float(np.interp(z_um, table.z_um, table.sn_kev_nm))
    return (se, sn)


def nuclear_vacancy_rate(table: StoppingTable, z_um: float) -> float:
    """Elastic-collision vacancy rate (1/nm) at depth z, 0 beyond range."""
    if z_um < 0:
        raise ValueError("depth must be non-negative")
    if z_um > table.range_um:
        return 0.0
    return float(np.interp(z_um, table.z_um, table.vac_per_nm))


def range_of(table: StoppingTable) -> float:
    """Largest depth (um) with any stopping power left."""
    return table.range_um
