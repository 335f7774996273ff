from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hazarg.errors import ParseError
from hazarg.fixtures import tdcs_dir
from hazarg.ingest import parse_fmea, serialize_fmea
from hazarg.ingest.fmea import COLUMNS, high_rpn

HEADER = ",".join(COLUMNS)


def row(ident: str, s, o, d, mitigations: str = "") -> str:
    return f"{ident},item {ident},mode {ident},effect;event:TOP,cause,{s},{o},{d},{mitigations}"


def test_tdcs_worksheet():
    entries = parse_fmea((tdcs_dir() / "tdcs.csv").read_text())
    assert [(e.id, e.rpn) for e in entries] == [("FM1", 160), ("FM2", 126), ("FM3", 24)]
    assert entries[0].mitigations == ("RS", "FDC", "WC")
    assert [e.id for e in high_rpn(entries, 100)] == ["FM1", "FM2"]


def test_effect_links():
    (entry,) = parse_fmea(HEADER + "\n" + row("X", 2, 2, 2) + "\n")
    assert entry.effects == ("effect", "event:TOP")
    assert entry.linked_events == ("TOP",)


@pytest.mark.parametrize("value", ["0", "11", "seven", "4.5"])
def test_bad_rating(value):
    text = HEADER + "\n" + row("X", 5, value, 5) + "\n"
    with pytest.raises(ParseError) as exc:
        parse_fmea(text, "w.csv")
    assert exc.value.code == "bad-rating"
    assert exc.value.line == 2
    assert exc.value.column == COLUMNS.index("occurrence") + 1


def test_missing_column():
    with pytest.raises(ParseError) as exc:
        parse_fmea("id,item\nX,y\n")
    assert exc.value.code == "missing-column"


def test_duplicate_row_id():
    text = "\n".join([HEADER, row("X", 1, 1, 1), row("X", 2, 2, 2)]) + "\n"
    with pytest.raises(ParseError) as exc:
        parse_fmea(text)
    assert (exc.value.code, exc.value.line) == ("duplicate-id", 3)


def test_high_rpn_order_ties_by_id():
    text = "\n".join([HEADER, row("B", 5, 5, 4), row("A", 10, 10, 1), row("C", 2, 2, 2)]) + "\n"
    assert [e.id for e in high_rpn(parse_fmea(text), 50)] == ["A", "B"]


ratings = st.tuples(st.integers(1, 10), st.integers(1, 10), st.integers(1, 10))


@settings(max_examples=100, deadline=None)
@given(st.lists(ratings, min_size=1, max_size=12))
def test_round_trip(rows):
    text = HEADER + "\n" + "\n".join(row(f"F{i}", *r) for i, r in enumerate(rows)) + "\n"
    entries = parse_fmea(text)
    assert parse_fmea(serialize_fmea(entries)) == entries
