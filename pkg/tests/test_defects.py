import numpy as np
import pytest

from tracknv.constants import FIRST_NEIGHBOR
from tracknv.defects import (cluster_defects, defects_to_rows, linear_densities,
                             wigner_seitz)
from tracknv.rng import seeded_stream
from tracknv.ttmd import build_diamond_cell


def brute_force_assign(reference, positions, cell):
    """O(N*M) oracle: nearest reference site by explicit minimum image."""
    occupancy = np.zeros(len(reference), dtype=int)
    for p in positions:
        d = reference - p
        d -= cell * np.round(d / cell)
        occupancy[np.argmin(np.einsum("ij,ij->i", d, d))] += 1
    return occupancy


def brute_force_clusters(coords, cell, cutoff):
    """All-pairs connected components oracle."""
    n = len(coords)
    adj = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            d = coords[i] - coords[j]
            d -= cell * np.round(d / cell)
            if np.sqrt(d @ d) <= cutoff:
                adj[i, j] = adj[j, i] = True
    labels = -np.ones(n, dtype=int)
    current = 0
    for i in range(n):
        if labels[i] >= 0:
            continue
        stack = [i]
        labels[i] = current
        while stack:
            a = stack.pop()
            for b in np.flatnonzero(adj[a]):
                if labels[b] < 0:
                    labels[b] = current
                    stack.append(b)
        current += 1
    return labels


@pytest.fixture()
def small_cell():
    return build_diamond_cell((1.4, 1.4, 1.4), 0.3567, 0.0, seeded_stream(0))


class TestWignerSeitz:
    def test_perfect_lattice_clean(self, small_cell):
        d = wigner_seitz(small_cell.reference_sites, small_cell.positions,
                         small_cell.cell)
        assert d.n_vacancies == 0
        assert d.n_interstitials == 0

    def test_single_vacancy(self, small_cell):
        pos = np.delete(small_cell.positions, 17, axis=0)
        d = wigner_seitz(small_cell.reference_sites, pos, small_cell.cell)
        assert d.n_vacancies == 1
        assert d.vacancy_sites[0] == 17
        assert d.n_interstitials == 0

    def test_frenkel_pair(self, small_cell):
        pos = small_cell.positions.copy()
        # displace one atom into the unoccupied tetrahedral interstice
        pos[5] = small_cell.reference_sites[5] + 0.5 * 0.3567
        d = wigner_seitz(small_cell.reference_sites, pos, small_cell.cell)
        assert d.n_vacancies == 1
        assert d.n_interstitials == 1

    def test_conservation_identity(self, small_cell):
        rng = seeded_stream(3).generator()
        keep = rng.random(small_cell.n_atoms) > 0.1
        pos = small_cell.positions[keep] + rng.normal(0, 0.04, (keep.sum(), 3))
        pos -= small_cell.cell * np.floor(pos / small_cell.cell)
        d = wigner_seitz(small_cell.reference_sites, pos, small_cell.cell)
        n_sites = len(small_cell.reference_sites)
        assert d.occupancy.sum() == keep.sum()
        assert d.n_vacancies - d.n_interstitials == n_sites - keep.sum()

    def test_matches_brute_force_on_randomized_cases(self):
        base = build_diamond_cell((1.1, 1.1, 1.1), 0.3567, 0.0, seeded_stream(1))
        for trial in range(20):
            rng = seeded_stream(100 + trial).generator()
            keep = rng.random(base.n_atoms) > 0.08
            pos = base.positions[keep] + rng.normal(0, 0.05, (keep.sum(), 3))
            extra = rng.uniform(0, base.cell[0], size=(rng.integers(0, 12), 3))
            pos = np.vstack([pos, extra])
            pos -= base.cell * np.floor(pos / base.cell)
            d = wigner_seitz(base.reference_sites, pos, base.cell)
            oracle = brute_force_assign(base.reference_sites, pos, base.cell)
            assert np.array_equal(d.occupancy, oracle)

    def test_invariant_under_lattice_translation(self, small_cell):
        rng = seeded_stream(9).generator()
        pos = np.delete(small_cell.positions, [3, 60], axis=0)
        pos = pos + rng.normal(0, 0.03, pos.shape)
        pos -= small_cell.cell * np.floor(pos / small_cell.cell)
        d0 = wigner_seitz(small_cell.reference_sites, pos, small_cell.cell)
        shift = np.array([0.3567, 0.3567, 0.0])  # whole lattice vector
        pos2 = pos + shift
        pos2 -= small_cell.cell * np.floor(pos2 / small_cell.cell)
        d1 = wigner_seitz(small_cell.reference_sites, pos2, small_cell.cell)
        assert d0.n_vacancies == d1.n_vacancies
        assert d0.n_interstitials == d1.n_interstitials


class TestClustering:
    def test_first_neighbor_pair_is_one_cluster(self, small_cell):
        # remove two first-neighbor atoms (site 0 and its basis partner)
        d0 = small_cell.reference_sites[0]
        dists = np.linalg.norm(small_cell.reference_sites - d0, axis=1)
        partner = int(np.argsort(dists)[1])
        assert dists[partner] == pytest.approx(FIRST_NEIGHBOR, rel=1e-6)
        pos = np.delete(small_cell.positions, [0, partner], axis=0)
        d = wigner_seitz(small_cell.reference_sites, pos, small_cell.cell)
        c = cluster_defects(d, 0.26)
        assert len(c.clusters) == 1
        assert c.clustered_count == 2
        assert c.isolated_count == 0

    def test_distant_vacancies_isolated(self):
        cellsys = build_diamond_cell((3.5, 3.5, 3.5), 0.3567, 0.0, seeded_stream(2))
        far = np.linalg.norm(cellsys.reference_sites - cellsys.reference_sites[0],
                             axis=1)
        other = int(np.argmin(np.abs(far - 3.0)))
        pos = np.delete(cellsys.positions, [0, other], axis=0)
        d = wigner_seitz(cellsys.reference_sites, pos, cellsys.cell)
        c = cluster_defects(d, 0.26)
        assert c.isolated_count == 2
        assert c.clustered_count == 0

    def test_matches_brute_force_partition(self):
        base = build_diamond_cell((1.8, 1.8, 1.8), 0.3567, 0.0, seeded_stream(4))
        for trial in range(12):
            rng = seeded_stream(200 + trial).generator()
            n_vac = int(rng.integers(2, 40))
            removed = rng.choice(base.n_atoms, n_vac, replace=False)
            pos = np.delete(base.positions, removed, axis=0)
            d = wigner_seitz(base.reference_sites, pos, base.cell)
            c = cluster_defects(d, 0.26)
            coords = base.reference_sites[d.vacancy_sites]
            labels = brute_force_clusters(coords, base.cell, 0.26)
            sizes_oracle = sorted(np.bincount(labels).tolist())
            assert sorted(len(x) for x in c.clusters) == sizes_oracle
            assert c.total_vacancies == d.n_vacancies

    def test_order_independence(self, small_cell):
        rng = seeded_stream(11).generator()
        removed = rng.choice(small_cell.n_atoms, 20, replace=False)
        pos = np.delete(small_cell.positions, removed, axis=0)
        d = wigner_seitz(small_cell.reference_sites, pos, small_cell.cell)
        c1 = cluster_defects(d, 0.26)
        # same defect set, shuffled atom order
        perm = rng.permutation(len(pos))
        d2 = wigner_seitz(small_cell.reference_sites, pos[perm], small_cell.cell)
        c2 = cluster_defects(d2, 0.26)
        assert sorted(map(len, c1.clusters)) == sorted(map(len, c2.clusters))


class TestDensities:
    def test_arithmetic(self):
        sys11 = build_diamond_cell((1.4, 1.4, 11.0), 0.3567, 0.0, seeded_stream(6))
        rng = seeded_stream(7).generator()
        # pick 11 well-separated sites
        sites = []
        coords = []
        for idx in rng.permutation(sys11.n_atoms):
            p = sys11.reference_sites[idx]
            if all(np.linalg.norm(p - q) > 1.0 for q in coords):
                sites.append(idx)
                coords.append(p)
            if len(sites) == 11:
                break
        pos = np.delete(sys11.positions, sites, axis=0)
        d = wigner_seitz(sys11.reference_sites, pos, sys11.cell)
        c = cluster_defects(d, 0.26)
        iso, clus = linear_densities(c, sys11.cell[2])
        assert iso == pytest.approx(11 / sys11.cell[2])
        assert clus == 0.0

    def test_rejects_bad_length(self):
        c = cluster_defects(
            wigner_seitz(np.zeros((1, 3)) + 0.1, np.zeros((1, 3)) + 0.1,
                         np.ones(3)), 0.2)
        with pytest.raises(ValueError):
            linear_densities(c, 0.0)

    def test_export_rows(self, small_cell):
        pos = np.delete(small_cell.positions, [0, 1], axis=0)
        d = wigner_seitz(small_cell.reference_sites, pos, small_cell.cell)
        c = cluster_defects(d, 0.26)
        rows = defects_to_rows(d, c)
        assert len(rows) == 2
        assert all(r["kind"] == "vacancy" for r in rows)
