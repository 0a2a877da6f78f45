import math

from permorb.tables import (
    EXPECTED_MAXIMAL_ND,
    EXPECTED_MINIMAL_ND,
    format_table,
    gap_grid,
    injectivity_summary,
    maximal_nd_table,
    minimal_nd_table,
    verify_tables,
)


def test_tables_match_frozen_values():
    assert verify_tables() == []


def test_specific_cells():
    assert minimal_nd_table()[(5, 4)] == 80
    assert maximal_nd_table()[(6, 6)] == 90
    assert minimal_nd_table()[(3, 3)] == 21
    assert maximal_nd_table()[(4, 2)] == 12


def test_maximal_table_against_direct_search():
    # independent oracle: largest D with ceil(D / (d-1)) <= log2(n) + 1
    for n in range(2, 7):
        for d in range(2, 7):
            limit = math.log2(n) + 1
            best = 0
            for D in range(1, 200):
                if math.ceil(D / (d - 1)) <= limit:
                    best = D
            assert EXPECTED_MAXIMAL_ND[(n, d)] == n * best


def test_minimal_table_formula():
    for (n, d), value in EXPECTED_MINIMAL_ND.items():
        assert value == n * n * (d - 1) + n


def test_summary_rows():
    rows = injectivity_summary(ns=(3,), ds=(3,))
    row = rows[0]
    assert row["sorted_upper"] == 21
    assert row["sorted_lower"] == 12
    assert row["pooled_upper"] == row["sketched_upper"] == 12
    assert row["generic_lower"] == 9


def test_gap_grid():
    rows = gap_grid(4, ds=(2, 3))
    assert rows[0] == {"d": 2, "D_no_separation_max": 3, "D_separation_min": 5}
    assert rows[1] == {"d": 3, "D_no_separation_max": 6, "D_separation_min": 9}


def test_format_table_renders_grid():
    text = format_table(minimal_nd_table())
    lines = text.splitlines()
    assert len(lines) == 6
    assert lines[1].split()[0] == "2"
    assert lines[1].split()[-1] == "22"
