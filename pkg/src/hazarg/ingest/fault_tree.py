"""Fault trees: a small line-oriented format, MOCUS cutsets, criticality.

Document grammar (one statement per line, ``#`` starts a comment)::

    event <id> "<label>" [p=<real>]
    gate  <id> = AND|OR(<id>, <id>, ...)
    top   <id>

Gate ids may also be declared with ``event`` to give them a label.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping

from ..errors import ParseError

ID_PATTERN = r"[A-Za-z_][A-Za-z0-9_.\-]*"


class EventKind(str, Enum):
    BASIC = "Basic"
    INTERMEDIATE = "Intermediate"
    TOP = "Top"


class GateOp(str, Enum):
    AND = "AND"
    OR = "OR"


@dataclass(frozen=True)
class Event:
    id: str
    label: str
    kind: EventKind
    probability: float | None = None


@dataclass(frozen=True)
class Gate:
    op: GateOp
    inputs: tuple[str, ...]


@dataclass(frozen=True)
class FaultTree:
    events: Mapping[str, Event]
    gates: Mapping[str, Gate]
    top: str

    @property
    def top_event(self) -> Event:
        return self.events[self.top]

    def basic_events(self) -> list[str]:
        return sorted(e for e in self.events if e not in self.gates)

    def occurs(self, true_events: Iterable[str]) -> bool:
        """Evaluate the structure function for a set of occurring basic events."""
        occurring = frozenset(true_events)
        memo: dict[str, bool] = {}

        def value(event_id: str) -> bool:
            if event_id not in memo:
                gate = self.gates.get(event_id)
                if gate is None:
                    memo[event_id] = event_id in occurring
                elif gate.op is GateOp.AND:
                    memo[event_id] = all(value(i) for i in gate.inputs)
                else:
                    memo[event_id] = any(value(i) for i in gate.inputs)
            return memo[event_id]

        return value(self.top)


@dataclass(frozen=True)
class Cutset:
    members: frozenset[str]
    probability: float | None
    critical: bool = False
    top: str = ""

    @property
    def key(self) -> str:
        return "+".join(sorted(self.members))

    @property
    def source_key(self) -> str:
        return f"cutset:{self.top}:{self.key}"


DEFAULT_THRESHOLD = 1e-4


@dataclass(frozen=True)
class CriticalityPolicy:
    """Either an absolute probability ``threshold`` or the ``top_k`` cutsets.

    With neither given the threshold defaults to ``DEFAULT_THRESHOLD``.
    """

    threshold: float | None = None
    top_k: int | None = None

    def __post_init__(self) -> None:
        if self.threshold is not None and self.top_k is not None:
            raise ValueError("give either threshold or top_k, not both")
        if self.threshold is None and self.top_k is None:
            object.__setattr__(self, "threshold", DEFAULT_THRESHOLD)
        if self.top_k is not None and self.top_k < 1:
            raise ValueError(f"top_k must be at least 1, got {self.top_k}")
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")


# ---------------------------------------------------------------- lexing

_TOKEN = re.compile(
    rf"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#.*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<prob>p=)
  | (?P<number>-?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)
  | (?P<ident>{ID_PATTERN})
  | (?P<punct>[=(),])
  | (?P<unterminated>")
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    column: int


def _tokenize(line: str, lineno: int, source: str | None) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m is None:
            raise ParseError(
                "syntax-error", f"unexpected character {line[pos]!r}", source=source, line=lineno, column=pos + 1
            )
        kind = m.lastgroup or ""
        if kind == "unterminated":
            raise ParseError("syntax-error", "unterminated string", source=source, line=lineno, column=pos + 1)
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), pos + 1))
        pos = m.end()
    return toks


class _Cursor:
    def __init__(self, toks: list[_Tok], lineno: int, eol: int, source: str | None) -> None:
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.eol = eol
        self.source = source

    def fail(self, message: str, tok: _Tok | None = None) -> ParseError:
        column = tok.column if tok else (self.peek().column if self.peek() else self.eol)
        return ParseError("syntax-error", message, source=self.source, line=self.lineno, column=column)

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, kind: str, text: str | None = None, what: str = "") -> _Tok:
        tok = self.peek()
        if tok is None or tok.kind != kind or (text is not None and tok.text != text):
            found = f"{tok.text!r}" if tok else "end of line"
            raise self.fail(f"expected {what or text or kind}, found {found}", tok)
        self.i += 1
        return tok

    def end(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise self.fail(f"unexpected {tok.text!r}", tok)


def _unquote(text: str) -> str:
    return re.sub(r"\\(.)", r"\1", text[1:-1])


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


# ---------------------------------------------------------------- parsing


def parse_fault_tree(text: str, source: str | None = None) -> FaultTree:
    declared: dict[str, tuple[str, float | None, int, int]] = {}
    gates: dict[str, tuple[GateOp, list[tuple[str, int]], int, int]] = {}
    top: tuple[str, int, int] | None = None

    def err(code: str, message: str, line: int, column: int) -> ParseError:
        return ParseError(code, message, source=source, line=line, column=column)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _tokenize(raw, lineno, source)
        if not toks:
            continue
        cur = _Cursor(toks, lineno, len(raw) + 1, source)
        head = cur.take("ident", what="statement keyword")
        if head.text == "event":
            ident = cur.take("ident", what="event id")
            label = _unquote(cur.take("string", what="quoted label").text)
            prob = None
            if cur.peek() is not None and cur.peek().kind == "prob":
                cur.take("prob")
                num = cur.take("number", what="probability")
                prob = float(num.text)
                if not 0.0 <= prob <= 1.0:
                    raise err("probability-out-of-range", f"probability {prob} outside [0, 1]", lineno, num.column)
            cur.end()
            if ident.text in declared:
                raise err("duplicate-id", f"event {ident.text!r} declared twice", lineno, ident.column)
            declared[ident.text] = (label, prob, lineno, ident.column)
        elif head.text == "gate":
            ident = cur.take("ident", what="gate id")
            cur.take("punct", "=")
            op_tok = cur.take("ident", what="AND or OR")
            if op_tok.text not in ("AND", "OR"):
                raise cur.fail(f"unknown gate operator {op_tok.text!r} (only AND, OR)", op_tok)
            cur.take("punct", "(")
            inputs = []
            while True:
                inp = cur.take("ident", what="input id")
                inputs.append((inp.text, inp.column))
                tok = cur.take("punct", what="',' or ')'")
                if tok.text == ")":
                    break
                if tok.text != ",":
                    raise cur.fail("expected ',' or ')'", tok)
            cur.end()
            if ident.text in gates:
                raise err("duplicate-id", f"gate {ident.text!r} defined twice", lineno, ident.column)
            gates[ident.text] = (GateOp(op_tok.text), inputs, lineno, ident.column)
        elif head.text == "top":
            ident = cur.take("ident", what="top event id")
            cur.end()
            if top is not None:
                raise err("duplicate-top", "top declared twice", lineno, head.column)
            top = (ident.text, lineno, ident.column)
        else:
            raise cur.fail(f"unknown statement {head.text!r}", head)

    if top is None:
        raise ParseError("missing-top", "no top statement", source=source)
    top_id, top_line, top_col = top
    known = set(declared) | set(gates)
    if top_id not in known:
        raise err("dangling-reference", f"top event {top_id!r} is not declared", top_line, top_col)
    for gate_id, (_, inputs, _, _) in gates.items():
        for inp, col in inputs:
            if inp not in known:
                raise err("dangling-reference", f"gate {gate_id!r} references undeclared {inp!r}", gates[gate_id][2], col)

    # Cycle check over the gate graph.
    state: dict[str, int] = {}

    def visit(node: str) -> None:
        state[node] = 1
        for inp, col in gates.get(node, (None, [], 0, 0))[1]:
            if state.get(inp) == 1:
                raise err("cycle", f"gate cycle through {node!r} -> {inp!r}", gates[node][2], col)
            if not state.get(inp):
                visit(inp)
        state[node] = 2

    for gate_id in sorted(gates):
        if not state.get(gate_id):
            visit(gate_id)

    used = {inp for _, inputs, _, _ in gates.values() for inp, _ in inputs}
    events: dict[str, Event] = {}
    for ident in sorted(known):
        if ident in declared:
            label, prob, line, col = declared[ident]
        else:
            label, prob = ident, None
            line, col = gates[ident][2], gates[ident][3]
        if ident != top_id and ident not in used:
            raise err("unused-event", f"event {ident!r} feeds no gate and is not the top", line, col)
        if ident in gates and prob is not None:
            raise err("probability-on-gate", f"gate event {ident!r} cannot carry a probability", line, col)
        if ident == top_id:
            kind = EventKind.TOP
        elif ident in gates:
            kind = EventKind.INTERMEDIATE
        else:
            kind = EventKind.BASIC
        events[ident] = Event(ident, label, kind, prob)
    return FaultTree(
        events=events,
        gates={g: Gate(op, tuple(i for i, _ in inputs)) for g, (op, inputs, _, _) in gates.items()},
        top=top_id,
    )


def serialize_fault_tree(tree: FaultTree) -> str:
    lines = []
    for ident in sorted(tree.events):
        event = tree.events[ident]
        line = f"event {ident} {_quote(event.label)}"
        if event.probability is not None:
            line += f" p={event.probability!r}"
        lines.append(line)
    for ident in sorted(tree.gates):
        gate = tree.gates[ident]
        lines.append(f"gate {ident} = {gate.op.value}({', '.join(gate.inputs)})")
    lines.append(f"top {tree.top}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- analysis


def _absorb(sets: Iterable[frozenset[str]]) -> list[frozenset[str]]:
    kept: list[frozenset[str]] = []
    for candidate in sorted(set(sets), key=lambda s: (len(s), sorted(s))):
        if not any(k <= candidate for k in kept):
            kept.append(candidate)
    return kept


def cutset_probability(tree: FaultTree, members: Iterable[str]) -> float | None:
    probs = [tree.events[m].probability for m in members]
    if any(p is None for p in probs):
        return None
    return math.prod(probs)  # type: ignore[arg-type]


def cutset_sort_key(cutset: Cutset) -> tuple:
    prob = cutset.probability
    return (0.0 if prob is None else -prob, len(cutset.members), sorted(cutset.members))


def minimal_cutsets(tree: FaultTree) -> list[Cutset]:
    """Top-down MOCUS expansion followed by subset absorption.

    Each row is a partial cutset (basic events so far) plus the events still
    to be expanded. AND gates widen a row, OR gates split it.
    """
    rows: list[tuple[frozenset[str], tuple[str, ...]]] = [(frozenset(), (tree.top,))]
    seen: set[tuple[frozenset[str], tuple[str, ...]]] = set()
    complete: set[frozenset[str]] = set()
    while rows:
        basics, pending = rows.pop()
        if not pending:
            complete.add(basics)
            continue
        head, rest = pending[0], pending[1:]
        gate = tree.gates.get(head)
        if gate is None:
            expanded = [(basics | {head}, rest)]
        elif gate.op is GateOp.AND:
            expanded = [(basics, gate.inputs + rest)]
        else:
            expanded = [(basics, (inp,) + rest) for inp in gate.inputs]
        for row in expanded:
            norm = (row[0], tuple(sorted(set(row[1]))))
            if norm not in seen:
                seen.add(norm)
                rows.append(norm)
    cutsets = [Cutset(m, cutset_probability(tree, m), top=tree.top) for m in _absorb(complete)]
    return sorted(cutsets, key=cutset_sort_key)


def critical_paths(cutsets: list[Cutset], policy: CriticalityPolicy) -> list[Cutset]:
    if any(c.probability is None for c in cutsets):
        raise ValueError("criticality ranking needs probabilities on all basic events")
    if policy.top_k is not None:
        ranked = sorted(range(len(cutsets)), key=lambda i: cutset_sort_key(cutsets[i]))
        chosen = set(ranked[: policy.top_k])
        return [replace(c, critical=i in chosen) for i, c in enumerate(cutsets)]
    assert policy.threshold is not None
    return [replace(c, critical=c.probability >= policy.threshold) for c in cutsets]  # type: ignore[operator]


@dataclass
class FaultTreeSummary:
    """Convenience bundle used by the CLI and the assembler."""

    tree: FaultTree
    cutsets: list[Cutset] = field(default_factory=list)

    @property
    def critical(self) -> list[Cutset]:
        return [c for c in self.cutsets if c.critical]


def analyse(tree: FaultTree, policy: CriticalityPolicy) -> FaultTreeSummary:
    return FaultTreeSummary(tree, critical_paths(minimal_cutsets(tree), policy))
