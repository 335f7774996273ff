"""Typed GSN goal structures.

Graphs are immutable values: ``add_node`` and ``add_edge`` return a new
graph and leave their argument untouched, so a rejected step can never
corrupt a partially built argument.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Mapping

from .errors import GsnError


class NodeKind(str, Enum):
    GOAL = "Goal"
    STRATEGY = "Strategy"
    SOLUTION = "Solution"
    CONTEXT = "Context"
    ASSUMPTION = "Assumption"
    JUSTIFICATION = "Justification"
    MODULE_REF = "ModuleRef"
    AWAY_GOAL = "AwayGoal"


class EdgeKind(str, Enum):
    SUPPORTED_BY = "SupportedBy"
    IN_CONTEXT_OF = "InContextOf"


DEVELOPABLE = frozenset({NodeKind.GOAL, NodeKind.STRATEGY})
CONTEXTUAL = frozenset({NodeKind.CONTEXT, NodeKind.ASSUMPTION, NodeKind.JUSTIFICATION})
REFERENCES = frozenset({NodeKind.AWAY_GOAL, NodeKind.MODULE_REF})

# Allowed (source kind, edge kind) -> target kinds.
EDGE_TABLE: dict[tuple[NodeKind, EdgeKind], frozenset[NodeKind]] = {
    (NodeKind.GOAL, EdgeKind.SUPPORTED_BY): frozenset(
        {NodeKind.GOAL, NodeKind.STRATEGY, NodeKind.SOLUTION, NodeKind.AWAY_GOAL, NodeKind.MODULE_REF}
    ),
    (NodeKind.STRATEGY, EdgeKind.SUPPORTED_BY): frozenset({NodeKind.GOAL}),
    (NodeKind.GOAL, EdgeKind.IN_CONTEXT_OF): CONTEXTUAL,
    (NodeKind.STRATEGY, EdgeKind.IN_CONTEXT_OF): CONTEXTUAL,
}


def edge_allowed(src: NodeKind, kind: EdgeKind, dst: NodeKind) -> bool:
    return dst in EDGE_TABLE.get((src, kind), frozenset())


@dataclass(frozen=True)
class GsnNode:
    id: str
    kind: NodeKind
    text: str
    developed: bool = True
    source_ref: str | None = None
    paper_tag: str | None = None
    # (module id, goal id) for AwayGoal / ModuleRef nodes.
    target: tuple[str, str] | None = None


@dataclass(frozen=True)
class GsnEdge:
    src: str
    dst: str
    kind: EdgeKind


@dataclass(frozen=True)
class GsnGraph:
    nodes: Mapping[str, GsnNode] = field(default_factory=dict)
    edges: tuple[GsnEdge, ...] = ()
    root: str | None = None

    def children(self, node_id: str, kind: EdgeKind = EdgeKind.SUPPORTED_BY) -> list[str]:
        return [e.dst for e in self.edges if e.src == node_id and e.kind is kind]

    def parents(self, node_id: str, kind: EdgeKind = EdgeKind.SUPPORTED_BY) -> list[str]:
        return [e.src for e in self.edges if e.dst == node_id and e.kind is kind]

    def __iter__(self) -> Iterator[GsnNode]:
        return iter(self.nodes.values())

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class SafetyCase:
    modules: Mapping[str, GsnGraph] = field(default_factory=dict)
    trace: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    meta: Mapping[str, object] = field(default_factory=dict)

    def node(self, node_id: str) -> GsnNode:
        for graph in self.modules.values():
            if node_id in graph.nodes:
                return graph.nodes[node_id]
        raise KeyError(node_id)

    def module_of(self, node_id: str) -> str:
        for module_id, graph in self.modules.items():
            if node_id in graph.nodes:
                return module_id
        raise KeyError(node_id)

    def all_nodes(self) -> Iterator[GsnNode]:
        for graph in self.modules.values():
            yield from graph.nodes.values()

    def all_edges(self) -> Iterator[GsnEdge]:
        for graph in self.modules.values():
            yield from graph.edges


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    module: str | None = None
    subject: str | None = None


def _node_problem(node: GsnNode) -> str | None:
    if not node.id or not node.id.strip():
        return "node id is empty"
    if not node.text or not node.text.strip():
        return f"node {node.id!r} has empty text"
    if not node.developed and node.kind not in DEVELOPABLE:
        return f"{node.kind.value} node {node.id!r} cannot be undeveloped"
    if node.kind in REFERENCES and node.target is None:
        return f"{node.kind.value} node {node.id!r} has no target"
    return None


def add_node(graph: GsnGraph, node: GsnNode) -> GsnGraph:
    """Return ``graph`` extended by ``node``.

    The first Goal added to a root-less graph becomes its root.
    """
    if node.id in graph.nodes:
        raise GsnError("duplicate-id", f"node id {node.id!r} already present")
    problem = _node_problem(node)
    if problem:
        raise GsnError("malformed-node", problem)
    nodes = dict(graph.nodes)
    nodes[node.id] = node
    root = graph.root
    if root is None and node.kind is NodeKind.GOAL:
        root = node.id
    return GsnGraph(nodes=nodes, edges=graph.edges, root=root)


def _reaches(graph: GsnGraph, start: str, goal: str) -> bool:
    seen = {start}
    todo = [start]
    while todo:
        cur = todo.pop()
        if cur == goal:
            return True
        for nxt in graph.children(cur):
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return False


def add_edge(graph: GsnGraph, edge: GsnEdge) -> GsnGraph:
    for end in (edge.src, edge.dst):
        if end not in graph.nodes:
            raise GsnError("unknown-endpoint", f"edge endpoint {end!r} does not exist")
    src, dst = graph.nodes[edge.src], graph.nodes[edge.dst]
    if not edge_allowed(src.kind, edge.kind, dst.kind):
        raise GsnError(
            "illegal-edge-kind",
            f"{edge.kind.value} not allowed from {src.kind.value} to {dst.kind.value}",
        )
    if edge in graph.edges:
        raise GsnError("duplicate-edge", f"edge {edge.src} -> {edge.dst} already present")
    if edge.kind is EdgeKind.SUPPORTED_BY and not src.developed:
        raise GsnError("undeveloped-source", f"undeveloped node {src.id!r} cannot have support")
    if edge.kind is EdgeKind.SUPPORTED_BY and _reaches(graph, edge.dst, edge.src):
        raise GsnError("cycle-introduced", f"edge {edge.src} -> {edge.dst} closes a cycle")
    return GsnGraph(nodes=graph.nodes, edges=graph.edges + (edge,), root=graph.root)


def replace_node(graph: GsnGraph, node: GsnNode) -> GsnGraph:
    if node.id not in graph.nodes:
        raise GsnError("unknown-endpoint", f"node {node.id!r} does not exist")
    nodes = dict(graph.nodes)
    nodes[node.id] = node
    return GsnGraph(nodes=nodes, edges=graph.edges, root=graph.root)


def merge_graphs(first: GsnGraph, second: GsnGraph) -> GsnGraph:
    """Union of two graphs sharing the same root; shared ids must agree."""
    if first.root != second.root:
        raise GsnError("root-mismatch", f"cannot merge graphs rooted at {first.root!r} and {second.root!r}")
    nodes = dict(first.nodes)
    for node in second.nodes.values():
        if node.id in nodes and nodes[node.id] != node:
            raise GsnError("duplicate-id", f"conflicting definitions of node {node.id!r}")
        nodes[node.id] = node
    edges = list(first.edges)
    edges.extend(e for e in second.edges if e not in first.edges)
    return GsnGraph(nodes=nodes, edges=tuple(edges), root=first.root)


def mark_developed(graph: GsnGraph) -> GsnGraph:
    """Set ``developed`` on goals/strategies from whether they have support."""
    has_support = {e.src for e in graph.edges if e.kind is EdgeKind.SUPPORTED_BY}
    nodes = {}
    for node in graph.nodes.values():
        if node.kind in DEVELOPABLE:
            node = replace(node, developed=node.id in has_support)
        nodes[node.id] = node
    return GsnGraph(nodes=nodes, edges=graph.edges, root=graph.root)


def _graph_violations(module: str, graph: GsnGraph) -> list[Violation]:
    out: list[Violation] = []

    def report(code: str, message: str, subject: str | None) -> None:
        out.append(Violation(code, message, module, subject))

    for node_id in sorted(graph.nodes):
        node = graph.nodes[node_id]
        if node.id != node_id:
            report("MalformedNode", f"node stored under {node_id!r} has id {node.id!r}", node_id)
        problem = _node_problem(node)
        if problem:
            report("MalformedNode", problem, node_id)

    valid_edges: list[GsnEdge] = []
    for edge in graph.edges:
        label = f"{edge.src}->{edge.dst}"
        if edge.src not in graph.nodes or edge.dst not in graph.nodes:
            report("UnknownEndpoint", f"edge {label} references a missing node", label)
            continue
        src, dst = graph.nodes[edge.src], graph.nodes[edge.dst]
        if src.kind is NodeKind.SOLUTION and edge.kind is EdgeKind.SUPPORTED_BY:
            report("SolutionWithChild", f"solution {src.id!r} is supported by {dst.id!r}", label)
        elif not edge_allowed(src.kind, edge.kind, dst.kind):
            report(
                "IllegalEdgeKind",
                f"{edge.kind.value} not allowed from {src.kind.value} to {dst.kind.value}",
                label,
            )
        else:
            valid_edges.append(edge)
        if not src.developed and edge.kind is EdgeKind.SUPPORTED_BY:
            report("UndevelopedWithSupport", f"undeveloped node {src.id!r} has support", src.id)

    support: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind is EdgeKind.SUPPORTED_BY and edge.src in graph.nodes and edge.dst in graph.nodes:
            support.setdefault(edge.src, []).append(edge.dst)

    # Three-colour DFS; each back edge is one cycle report.
    colour: dict[str, int] = {}
    for start in sorted(graph.nodes):
        if colour.get(start):
            continue
        stack: list[tuple[str, Iterator[str]]] = [(start, iter(support.get(start, ())))]
        colour[start] = 1
        while stack:
            cur, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[cur] = 2
                stack.pop()
            elif colour.get(nxt) == 1:
                report("Cycle", f"supported-by cycle through {cur} -> {nxt}", f"{cur}->{nxt}")
            elif not colour.get(nxt):
                colour[nxt] = 1
                stack.append((nxt, iter(support.get(nxt, ()))))

    if graph.root is None:
        report("NoRoot", "graph has no root goal", None)
        return out
    if graph.root not in graph.nodes:
        report("NoRoot", f"root {graph.root!r} is not a node", graph.root)
        return out
    if graph.nodes[graph.root].kind is not NodeKind.GOAL:
        report("RootNotGoal", f"root {graph.root!r} is not a goal", graph.root)
    if graph.parents(graph.root):
        report("RootHasParent", f"root {graph.root!r} supports another node", graph.root)

    reached = {graph.root}
    queue = deque([graph.root])
    while queue:
        cur = queue.popleft()
        for nxt in support.get(cur, ()):
            if nxt not in reached:
                reached.add(nxt)
                queue.append(nxt)
    for edge in valid_edges:
        if edge.kind is EdgeKind.IN_CONTEXT_OF and edge.src in reached:
            reached.add(edge.dst)
    for node_id in sorted(graph.nodes):
        if node_id not in reached:
            report("UnreachableNode", f"node {node_id!r} is not reachable from root", node_id)
    return out


def validate(case: SafetyCase) -> list[Violation]:
    """All well-formedness violations of ``case``; empty iff it is well formed."""
    out: list[Violation] = []
    owner: dict[str, str] = {}
    for module_id in sorted(case.modules):
        for node_id in sorted(case.modules[module_id].nodes):
            if node_id in owner:
                out.append(
                    Violation(
                        "DuplicateId",
                        f"node id {node_id!r} used in modules {owner[node_id]!r} and {module_id!r}",
                        module_id,
                        node_id,
                    )
                )
            else:
                owner[node_id] = module_id
    for module_id in sorted(case.modules):
        graph = case.modules[module_id]
        out.extend(_graph_violations(module_id, graph))
        for node_id in sorted(graph.nodes):
            node = graph.nodes[node_id]
            if node.kind not in REFERENCES or node.target is None:
                continue
            target_module, target_goal = node.target
            target_graph = case.modules.get(target_module)
            if target_graph is None or target_goal not in target_graph.nodes:
                out.append(
                    Violation(
                        "UnresolvedReference",
                        f"{node.kind.value} {node_id!r} targets missing {target_module}/{target_goal}",
                        module_id,
                        node_id,
                    )
                )
            elif target_graph.nodes[target_goal].kind is not NodeKind.GOAL:
                out.append(
                    Violation(
                        "UnresolvedReference",
                        f"{node.kind.value} {node_id!r} target {target_goal!r} is not a goal",
                        module_id,
                        node_id,
                    )
                )
    for node_id in sorted(case.trace):
        if node_id not in owner:
            out.append(Violation("UnresolvedTrace", f"trace entry for missing node {node_id!r}", None, node_id))
    return out


def undeveloped_goals(case: SafetyCase) -> list[str]:
    return sorted(n.id for n in case.all_nodes() if n.kind in DEVELOPABLE and not n.developed)


def build_graph(nodes: Iterable[GsnNode], edges: Iterable[GsnEdge]) -> GsnGraph:
    """Checked construction from node and edge lists (nodes first, then edges)."""
    graph = GsnGraph()
    for node in nodes:
        graph = add_node(graph, node)
    for edge in edges:
        graph = add_edge(graph, edge)
    return graph
