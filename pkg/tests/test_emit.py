from __future__ import annotations

import csv
import io
import json

import pydot
import pytest
from hypothesis import given, settings

from hazarg.assembler import cross_links
from hazarg.errors import ParseError
from hazarg.gsn import GsnGraph, SafetyCase, add_edge, add_node
from hazarg.emit import from_interchange, render_report, to_dot, to_interchange, trace_csv
from hazarg.emit.dot import display_tags, quote
from hazarg.emit.report import TRACE_COLUMNS
from test_gsn import construction

DEFAULTS = {"node", "edge", "graph"}


def dot_nodes(graph: pydot.Dot) -> set[str]:
    out = {n.get_name().strip('"') for n in graph.get_nodes()} - DEFAULTS
    for sub in graph.get_subgraphs():
        out |= dot_nodes(sub)
    return out


def parse_dot(text: str) -> pydot.Dot:
    graphs = pydot.graph_from_dot_data(text)
    assert graphs is not None and len(graphs) == 1
    return graphs[0]


def test_interchange_round_trip(tdcs_case):
    text = to_interchange(tdcs_case)
    again = from_interchange(text)
    assert again == tdcs_case
    assert to_interchange(again) == text
    data = json.loads(text)
    assert data["format"] == "hazarg-interchange" and data["version"] == "1"


@pytest.mark.parametrize(
    "text,code",
    [("{", "syntax-error"), ('{"format": "other"}', "bad-value"), ('{"format": "hazarg-interchange", "version": "1"}', "bad-value")],
)
def test_interchange_rejects(text, code):
    with pytest.raises(ParseError) as exc:
        from_interchange(text, "case.json")
    assert exc.value.code == code


@settings(max_examples=60, deadline=None)
@given(construction())
def test_interchange_round_trip_generated(ops):
    g = GsnGraph()
    for what, item in ops:
        g = add_node(g, item) if what == "node" else add_edge(g, item)
    case = SafetyCase({"X": g}, trace={"N0": ("fmea:F1",)}, meta={"note": "ü"})
    assert from_interchange(to_interchange(case)) == case


def test_dot_parses_and_counts(tdcs_case):
    text = to_dot(tdcs_case)
    graph = parse_dot(text)
    names = dot_nodes(graph)
    assert names == {n.id for n in tdcs_case.all_nodes()}
    assert len(graph.get_edges()) == sum(1 for _ in tdcs_case.all_edges())
    assert len(graph.get_subgraphs()) == len(tdcs_case.modules)


def test_dot_flat(tdcs_case):
    graph = parse_dot(to_dot(tdcs_case, per_module=False))
    assert graph.get_subgraphs() == []
    assert len(dot_nodes(graph)) == sum(1 for _ in tdcs_case.all_nodes())


def test_dot_arrowheads(tdcs_case):
    text = to_dot(tdcs_case)
    assert '"G1@M" -> "C1@M" [arrowhead=empty];' in text
    assert '"G1@M" -> "S1-SLE@M" [arrowhead=normal];' in text


def test_quote_escapes():
    assert quote('say "hi"\n\\') == '"say \\"hi\\"\\n\\\\"'


def test_display_tags_letter_siblings(tdcs_case):
    tags = display_tags(tdcs_case.modules["M"])
    assert tags["G2-DEP@M"] == "Goal 2a" and tags["G2-DRC@M"] == "Goal 2b"
    assert tags["G1@M"] == "Goal 1"


def test_report_complete(tdcs_report, tdcs_case):
    text = render_report(tdcs_report, cross_links(tdcs_case))
    assert text.startswith("Coverage: COMPLETE\n")
    assert "\033[" not in text
    assert "High-RPN failure modes (FMEA)" in text
    coloured = render_report(tdcs_report, cross_links(tdcs_case), color=True)
    assert "\033[32m" in coloured


def test_trace_csv(tdcs_report):
    rows = list(csv.reader(io.StringIO(trace_csv(tdcs_report))))
    assert tuple(rows[0]) == TRACE_COLUMNS
    assert [r[0] for r in rows[1:]] == [r.source for r in tdcs_report.trace_matrix]
