from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hazarg.errors import GsnError
from hazarg.gsn import (
    EdgeKind,
    GsnEdge,
    GsnGraph,
    GsnNode,
    NodeKind,
    SafetyCase,
    add_edge,
    add_node,
    build_graph,
    undeveloped_goals,
    validate,
)

SB = EdgeKind.SUPPORTED_BY
IC = EdgeKind.IN_CONTEXT_OF


def goal(ident: str, developed: bool = True) -> GsnNode:
    return GsnNode(ident, NodeKind.GOAL, f"claim {ident}", developed=developed)


def node(ident: str, kind: NodeKind) -> GsnNode:
    return GsnNode(ident, kind, f"{kind.value} {ident}")


def codes(case: SafetyCase) -> list[str]:
    return [v.code for v in validate(case)]


def test_first_goal_becomes_root():
    g = add_node(GsnGraph(), goal("G1"))
    assert g.root == "G1" and len(g) == 1


def test_duplicate_id_rejected():
    g = add_node(GsnGraph(), goal("G1"))
    with pytest.raises(GsnError) as exc:
        add_node(g, goal("G1"))
    assert exc.value.code == "duplicate-id"


@pytest.mark.parametrize(
    "bad",
    [
        GsnNode("Sn1", NodeKind.SOLUTION, "evidence", developed=False),
        GsnNode("G1", NodeKind.GOAL, "   "),
        GsnNode("AG1", NodeKind.AWAY_GOAL, "elsewhere"),
    ],
)
def test_malformed_nodes_rejected(bad):
    with pytest.raises(GsnError) as exc:
        add_node(GsnGraph(), bad)
    assert exc.value.code == "malformed-node"


def small_graph() -> GsnGraph:
    g = GsnGraph()
    for n in (goal("G1"), node("S1", NodeKind.STRATEGY), goal("G2"), node("Sn1", NodeKind.SOLUTION), node("C1", NodeKind.CONTEXT)):
        g = add_node(g, n)
    return g


def test_goal_to_strategy_accepted():
    g = add_edge(small_graph(), GsnEdge("G1", "S1", SB))
    assert g.children("G1") == ["S1"]


@pytest.mark.parametrize(
    "edge,code",
    [
        (GsnEdge("Sn1", "G1", SB), "illegal-edge-kind"),
        (GsnEdge("S1", "Sn1", SB), "illegal-edge-kind"),
        (GsnEdge("C1", "G1", IC), "illegal-edge-kind"),
        (GsnEdge("G1", "G2", IC), "illegal-edge-kind"),
        (GsnEdge("G1", "nowhere", SB), "unknown-endpoint"),
    ],
)
def test_illegal_edges_rejected(edge, code):
    before = small_graph()
    with pytest.raises(GsnError) as exc:
        add_edge(before, edge)
    assert exc.value.code == code


def test_cycle_rejected_and_graph_unchanged():
    g = add_edge(small_graph(), GsnEdge("G1", "G2", SB))
    snapshot = (dict(g.nodes), g.edges, g.root)
    with pytest.raises(GsnError) as exc:
        add_edge(g, GsnEdge("G2", "G1", SB))
    assert exc.value.code == "cycle-introduced"
    assert (dict(g.nodes), g.edges, g.root) == snapshot


def test_orphan_context_unreachable():
    g = build_graph([goal("G1"), node("Sn1", NodeKind.SOLUTION), node("C9", NodeKind.CONTEXT)], [GsnEdge("G1", "Sn1", SB)])
    assert codes(SafetyCase({"M": g})) == ["UnreachableNode"]


def test_dangling_away_goal():
    away = GsnNode("AG1", NodeKind.AWAY_GOAL, "elsewhere", target=("X", "G9"))
    g = build_graph([goal("G1"), away], [GsnEdge("G1", "AG1", SB)])
    assert codes(SafetyCase({"M": g})) == ["UnresolvedReference"]


def test_away_goal_resolves_across_modules():
    away = GsnNode("AG1", NodeKind.AWAY_GOAL, "elsewhere", target=("X", "G9"))
    m = build_graph([goal("G1"), away], [GsnEdge("G1", "AG1", SB)])
    x = build_graph([goal("G9"), node("Sn9", NodeKind.SOLUTION)], [GsnEdge("G9", "Sn9", SB)])
    assert validate(SafetyCase({"M": m, "X": x})) == []


def test_trace_must_reference_nodes():
    g = build_graph([goal("G1"), node("Sn1", NodeKind.SOLUTION)], [GsnEdge("G1", "Sn1", SB)])
    assert codes(SafetyCase({"M": g}, trace={"ghost": ("fmea:FM1",)})) == ["UnresolvedTrace"]


def test_tdcs_case_is_well_formed(tdcs_case):
    assert validate(tdcs_case) == []
    assert undeveloped_goals(tdcs_case) == []


def test_undeveloped_goals_sorted():
    g = build_graph([goal("G1"), goal("Gb", developed=False), goal("Ga", developed=False)], [GsnEdge("G1", "Gb", SB), GsnEdge("G1", "Ga", SB)])
    assert undeveloped_goals(SafetyCase({"M": g})) == ["Ga", "Gb"]


KINDS = [NodeKind.GOAL, NodeKind.STRATEGY, NodeKind.SOLUTION, NodeKind.CONTEXT, NodeKind.ASSUMPTION, NodeKind.JUSTIFICATION]


@st.composite
def construction(draw):
    """A connected sequence of node/edge additions hanging off one root goal."""
    ops = [("node", goal("N0"))]
    kinds = {"N0": NodeKind.GOAL}
    for i in range(1, draw(st.integers(1, 14))):
        parents = [n for n, k in kinds.items() if k in (NodeKind.GOAL, NodeKind.STRATEGY)]
        parent = draw(st.sampled_from(parents))
        if kinds[parent] is NodeKind.STRATEGY:
            kind = NodeKind.GOAL
        else:
            kind = draw(st.sampled_from(KINDS))
        ident = f"N{i}"
        kinds[ident] = kind
        ops.append(("node", node(ident, kind)))
        edge_kind = IC if kind in (NodeKind.CONTEXT, NodeKind.ASSUMPTION, NodeKind.JUSTIFICATION) else SB
        ops.append(("edge", GsnEdge(parent, ident, edge_kind)))
    return ops


@settings(max_examples=150, deadline=None)
@given(construction())
def test_successful_construction_validates(ops):
    g = GsnGraph()
    for what, item in ops:
        g = add_node(g, item) if what == "node" else add_edge(g, item)
    case = SafetyCase({"M": g})
    assert validate(case) == []
    assert validate(case) == validate(case)
    for ident in undeveloped_goals(case):
        n = case.node(ident)
        assert n.kind in (NodeKind.GOAL, NodeKind.STRATEGY)
        assert not g.children(ident)


@settings(max_examples=100, deadline=None)
@given(construction(), st.integers(0, 30), st.integers(0, 30))
def test_rejected_edge_leaves_graph_identical(ops, a, b):
    g = GsnGraph()
    for what, item in ops:
        g = add_node(g, item) if what == "node" else add_edge(g, item)
    ids = sorted(g.nodes)
    edge = GsnEdge(ids[a % len(ids)], ids[b % len(ids)], SB)
    before = (dict(g.nodes), g.edges, g.root)
    try:
        add_edge(g, edge)
    except GsnError:
        pass
    assert (dict(g.nodes), g.edges, g.root) == before
