import numpy as np
import pytest

from tracknv.stopping import (TableFormatError, load_bundled, nuclear_vacancy_rate,
                              parse_stopping_table, range_of, stopping_at_depth)

SMALL = """\
# ion=X energy_mev=10.0
z_um Se Sn vac
0.0  4.0  0.5  0.1
1.0  3.0  0.5  0.2
2.0  2.0  1.0  0.4
3.0  0.0  0.0  0.0
"""


@pytest.fixture(scope="module")
def u_table():
    return load_bundled("U_diamond")


@pytest.fixture(scope="module")
def au_table():
    return load_bundled("Au_diamond")


class TestParser:
    def test_small_table(self):
        t = parse_stopping_table(SMALL)
        assert t.ion == "X"
        assert t.range_um == 2.0
        assert t.energy_mev == 10.0

    def test_duplicate_depth_rejected(self):
        text = SMALL.replace("1.0  3.0", "0.0  3.0")
        with pytest.raises(TableFormatError, match="increasing"):
            parse_stopping_table(text)

    def test_negative_value_rejected(self):
        with pytest.raises(TableFormatError, match="negative"):
            parse_stopping_table(SMALL.replace("3.0  0.5", "-3.0  0.5"))

    def test_malformed_row_reports_line(self):
        with pytest.raises(TableFormatError, match="line 4"):
            parse_stopping_table(SMALL.replace("1.0  3.0  0.5  0.2",
                                               "1.0  3.0  0.5  0.2  9  9"))

    def test_non_numeric_reports_line(self):
        with pytest.raises(TableFormatError, match="line 5"):
            parse_stopping_table(SMALL.replace("2.0  2.0  1.0  0.4",
                                               "2.0  two  1.0  0.4"))

    def test_three_column_variant(self):
        text = "z Se Sn\n0 4 1\n1 2 1\n2 0 0\n"
        t = parse_stopping_table(text)
        assert np.all(t.vac_per_nm == 0.0)


class TestBundledTables:
    def test_u_surface_and_range(self, u_table):
        se0, _ = stopping_at_depth(u_table, 0.0)
        assert se0 == pytest.approx(49.0, rel=0.10)
        assert range_of(u_table) == pytest.approx(30.0, rel=0.10)

    def test_au_surface_and_range(self, au_table):
        se0, _ = stopping_at_depth(au_table, 0.0)
        assert se0 == pytest.approx(40.0, rel=0.10)
        assert range_of(au_table) == pytest.approx(30.0, rel=0.10)

    def test_energy_balance_within_5pc(self, u_table, au_table):
        assert u_table.energy_balance() == pytest.approx(1.0, abs=0.05)
        assert au_table.energy_balance() == pytest.approx(1.0, abs=0.05)

    def test_beyond_range_is_zero(self, u_table):
        assert stopping_at_depth(u_table, 35.0) == (0.0, 0.0)
        assert nuclear_vacancy_rate(u_table, 35.0) == 0.0

    def test_nuclear_vacancy_rate_near_half(self, u_table):
        v = nuclear_vacancy_rate(u_table, 10.0)
        assert 0.25 <= v <= 0.75  # ~0.5/nm with a 50% provenance band

    def test_vacancy_rate_peaks_near_end_of_range(self, u_table):
        # read the ingested table's own end-of-range peak
        peak_z = u_table.z_um[np.argmax(u_table.vac_per_nm)]
        assert peak_z > 25.0
        assert nuclear_vacancy_rate(u_table, float(peak_z)) > \
            5 * nuclear_vacancy_rate(u_table, 10.0)


class TestInterpolation:
    def test_exact_at_nodes(self, u_table):
        for i in (0, 10, 100, 300):
            z = float(u_table.z_um[i])
            se, sn = stopping_at_depth(u_table, z)
            assert se == pytest.approx(float(u_table.se_kev_nm[i]), rel=0, abs=0)
            assert sn == pytest.approx(float(u_table.sn_kev_nm[i]), rel=0, abs=0)

    def test_midpoint_is_arithmetic_mean(self):
        t = parse_stopping_table(SMALL)
        se, sn = stopping_at_depth(t, 0.5)
        assert se == pytest.approx(3.5)
        assert sn == pytest.approx(0.5)

    def test_negative_depth_rejected(self, u_table):
        with pytest.raises(ValueError):
            stopping_at_depth(u_table, -0.1)

    def test_zeroed_table_has_zero_range(self):
        t = parse_stopping_table("z Se Sn\n0 0 0\n1 0 0\n")
        assert range_of(t) == 0.0

    def test_deposited_up_to_monotone(self, u_table):
        zs = np.linspace(0, 30, 61)
        deps = [u_table.deposited_up_to(z) for z in zs]
        assert np.all(np.diff(deps) > 0)
        assert deps[-1] == pytest.approx(u_table.energy_mev, rel=0.05)
