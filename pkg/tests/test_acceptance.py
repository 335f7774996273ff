"""The seven acceptance criteria, one test each, at their stated tolerances."""

from __future__ import annotations

import random
import time
from collections import Counter

import pytest
import yaml

from hazarg.assembler import Sequence, build_safety_case, coverage, cross_links
from hazarg.emit import render_report, to_dot, to_interchange
from hazarg.fixtures import TDCS_CM, tdcs_config, tdcs_dir, tdcs_sources
from hazarg.gsn import NodeKind, undeveloped_goals, validate
from hazarg.ingest import parse_fault_tree, parse_fmea
from hazarg.ingest.fault_tree import minimal_cutsets
from hazarg.ingest.fmea import COLUMNS, high_rpn
from hazarg.patterns import HC_REFINEMENTS, builtin, refine, template_diff
from conftest import GOLDEN
from defects import DEFECTS
from oracles import brute_force_cutsets, random_tree


def build(sources, **cfg):  # type: ignore[no-untyped-def]
    return build_safety_case(sources.trees, sources.fmea, sources.stpa, sources.countermeasures, tdcs_config(**cfg))


@pytest.mark.acceptance("AC1", "TDCS end-to-end reproduction matches frozen golden interchange and DOT (< 1 s)")
def test_ac1_tdcs_reproduction():
    start = time.perf_counter()
    sources = tdcs_sources()
    case = build(sources)
    interchange, dot = to_interchange(case), to_dot(case)
    elapsed = time.perf_counter() - start
    assert interchange.encode("utf-8") == (GOLDEN / "tdcs_case.json").read_bytes()
    assert dot.encode("utf-8") == (GOLDEN / "tdcs_case.dot").read_bytes()
    assert elapsed < 1.0, f"build took {elapsed:.3f} s"

    m = case.modules["M"]
    events = sorted(n.text for n in m if n.paper_tag == "Goal 2" and n.kind is NodeKind.GOAL)
    assert events == [
        "Hazardous single-point failure door controller calculates wrong door position is eliminated or sufficiently mitigated",
        "Hazardous single-point failure lack of power supply for H-bridge is eliminated or sufficiently mitigated",
        "Hazardous system-level event door remains closed in case of emergency is eliminated or sufficiently mitigated",
        "Hazardous system-level event train departs with open doors is eliminated or sufficiently mitigated",
    ]

    cr_fta = case.modules["CR-FTA-DEP"]
    pair_goals = [n for n in cr_fta if n.paper_tag == "Goal 2.1.2" and n.kind is NodeKind.GOAL]
    assert len(pair_goals) == 1
    assert pair_goals[0].text == (
        "Design revision robust sensors (RS) eliminating critical path "
        "(additional infrared sensors faulty, optical encoder broken or faulty) is successfully conducted"
    )
    assert [n.paper_tag for n in cr_fta if n.kind is NodeKind.SOLUTION] == ["Solution 1"]
    assert cr_fta.children(pair_goals[0].id) == ["AG-G2.1.2@HC-FTA-DEP-IR+OE-RS"]

    cr_fmea = case.modules["CR-FMEA-FM1"]
    s2 = next(n.id for n in cr_fmea if n.paper_tag == "Strategy 2")
    s3 = next(n.id for n in cr_fmea if n.paper_tag == "Strategy 3")
    s2_revisions = [cr_fmea.nodes[c] for c in cr_fmea.children(s2) if cr_fmea.nodes[c].paper_tag == "Goal 2.1.2"]
    assert [n.id for n in s2_revisions] == ["G2.1.2-RS@CR-FMEA-FM1", "G2.1.2-FDC@CR-FMEA-FM1"]
    (process,) = [cr_fmea.nodes[c] for c in cr_fmea.children(s3)]
    assert "check for correct wiring and sensor application" in process.text

    hc = case.modules["HC-FMEA-FM1-FDC"]
    requirement = next(n for n in hc if n.paper_tag == "Solution 3a")
    assert requirement.text.endswith("controller detects data inconsistencies")
    assert hc.children("G2.1.2.2@HC-FMEA-FM1-FDC") == ["Sn4@HC-FMEA-FM1-FDC"]
    assert hc.children("G2.1.2.3@HC-FMEA-FM1-FDC") == ["Sn5@HC-FMEA-FM1-FDC"]
    assert validate(case) == []


@pytest.mark.acceptance("AC2", "minimal_cutsets equals brute-force oracle on >= 500 random trees (<= 8 events, < 30 s)")
def test_ac2_cutset_oracle():
    rng = random.Random(20260101)
    start = time.perf_counter()
    checked = mismatches = 0
    for _ in range(600):
        text, gates, basics = random_tree(rng, max_basic=8)
        assert len(basics) <= 8
        got = {c.members for c in minimal_cutsets(parse_fault_tree(text))}
        mismatches += got != brute_force_cutsets(gates, basics)
        checked += 1
    elapsed = time.perf_counter() - start
    assert checked >= 500
    assert mismatches == 0, f"{mismatches}/{checked} trees disagree with the oracle"
    assert elapsed < 30.0, f"took {elapsed:.1f} s"


@pytest.mark.acceptance("AC3", "refine(HC-GEN, t-values) has an empty diff against builtin HC-t for FTA, FMEA, STPA")
def test_ac3_refinement_soundness():
    for technique in ("FTA", "FMEA", "STPA"):
        refined = refine(builtin("HC-GEN"), HC_REFINEMENTS[technique])
        assert template_diff(refined, builtin(f"HC-{technique}")) == [], technique


@pytest.mark.acceptance("AC4", "all 10 seeded defect fixtures rejected with their designated code")
def test_ac4_validator_completeness():
    assert len(DEFECTS) == 10
    failures = {name: probe() for name, (code, probe) in DEFECTS.items()}
    wrong = {name: got for name, got in failures.items() if got != [DEFECTS[name][0]]}
    assert wrong == {}


@pytest.mark.acceptance("AC5", "deleting any one countermeasure record orphans exactly its sources and defers its goal")
def test_ac5_coverage_monotonicity():
    registry = yaml.safe_load((tdcs_dir() / TDCS_CM).read_text())
    records = registry["countermeasures"]
    assert records
    for index, record in enumerate(records):
        reduced = {"countermeasures": records[:index] + records[index + 1 :]}
        sources = tdcs_sources(yaml.safe_dump(reduced, sort_keys=False))
        case = build(sources)
        report = coverage(case, sources)
        assert not report.is_empty, record["id"]
        assert sorted(u.source for u in report.uncovered) == sorted(record["targets"]), record["id"]
        undeveloped = undeveloped_goals(case)
        assert report.undeveloped == tuple(undeveloped)
        for key in record["targets"]:
            goals = [g for g in undeveloped if key in case.trace.get(g, ())]
            assert goals, f"{record['id']}: no deferred goal for {key}"
            assert all(case.node(g).paper_tag in ("Goal 2.1.2", "Goal 2.1.3") for g in goals)


def outputs(sequence: Sequence) -> tuple[str, str, str, object]:
    sources = tdcs_sources()
    case = build(sources, sequence=sequence)
    report = render_report(coverage(case, sources), cross_links(case), sequence)
    return to_interchange(case), to_dot(case), report, case


def multisets(case) -> tuple[Counter, Counter]:  # type: ignore[no-untyped-def]
    nodes = Counter((n.id, n.kind.value, n.text, n.developed, n.paper_tag, n.target) for n in case.all_nodes())
    edges = Counter((e.src, e.dst, e.kind.value) for e in case.all_edges())
    return nodes, edges


@pytest.mark.acceptance("AC6", "identical inputs give byte-identical outputs; both sequences give equal node/edge multisets")
def test_ac6_determinism():
    first, second = outputs(Sequence.TECHNIQUE_FIRST), outputs(Sequence.TECHNIQUE_FIRST)
    assert first[:3] == second[:3]
    item = outputs(Sequence.ITEM_FIRST)
    assert item[:3] == outputs(Sequence.ITEM_FIRST)[:3]
    assert multisets(first[3]) == multisets(item[3])
    assert first[0] != item[0]  # the order does change


@pytest.mark.acceptance("AC7", "rpn = S*O*D on every parsed row and high_rpn is monotone over 100 threshold pairs")
def test_ac7_rpn_properties():
    rng = random.Random(7)
    rows = [",".join(COLUMNS)]
    expected = {}
    for i in range(200):
        s, o, d = rng.randint(1, 10), rng.randint(1, 10), rng.randint(1, 10)
        expected[f"F{i}"] = s * o * d
        rows.append(f"F{i},item {i},mode {i},effect,cause,{s},{o},{d},")
    entries = parse_fmea("\n".join(rows) + "\n") + parse_fmea((tdcs_dir() / "tdcs.csv").read_text())
    expected.update({"FM1": 8 * 4 * 5, "FM2": 7 * 3 * 6, "FM3": 3 * 4 * 2})
    assert all(isinstance(e.rpn, int) and e.rpn == expected[e.id] for e in entries)

    for _ in range(100):
        low, high = sorted(rng.randint(1, 1000) for _ in range(2))
        wide, narrow = high_rpn(entries, low), high_rpn(entries, high)
        assert {e.id for e in narrow} <= {e.id for e in wide}
        assert all(e.rpn >= high for e in narrow)
        assert {e.id for e in wide} == {e.id for e in entries if e.rpn >= low}
