import pytest

from cfident.identify import branch_table, verify_branch
from cfident.ledger import find_entry, parse_ledger, read_ledger, render_ledger, write_ledger


@pytest.fixture(scope="module")
def reports():
    table = {b.branch_id: b for b in branch_table("A", (3, 2, 3))}
    return [verify_branch(table[bid], 20, seed=1) for bid in ("A1", "A5[i=1]", "A6[i=0]")]


def test_only_failures_get_sections(reports):
    text = render_ledger(reports, "cfident verify --family A --dims 3,2,3")
    assert "## A5[i=1] (Theorem 6(d), i=1)" in text
    assert "## A1 " not in text and "## A6" not in text
    assert "Branches with counterexamples: 1." in text


def test_round_trip_reproduces_gap(tmp_path, reports):
    path = tmp_path / "ledger.md"
    write_ledger(reports, path)
    entries = read_ledger(path)
    assert len(entries) == 1
    entry = find_entry(entries, "A", (3, 2, 3), "A5[i=1]")
    formula, oracle = entry.recompute()
    assert formula == entry.formula_value and oracle == entry.oracle_value
    assert abs(formula - oracle) > 1e-6


def test_clean_ledger_has_no_entries(reports):
    assert parse_ledger(render_ledger([reports[0], reports[2]])) == []


def test_find_entry_missing(reports):
    assert find_entry(parse_ledger(render_ledger(reports)), "B", (3, 2, 3), "A5[i=1]") is None
