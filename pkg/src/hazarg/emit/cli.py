"""Command line driver: ``hazarg <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Sequence as Seq

from ..assembler import BuildConfig, Sequence, Sources, Technique, build_safety_case, coverage, cross_links
from ..errors import HazargError
from ..gsn import validate
from ..ingest import (
    load_countermeasures,
    parse_fault_tree,
    parse_fmea,
    parse_stpa,
    serialize_countermeasures,
    serialize_fault_tree,
    serialize_fmea,
    serialize_stpa,
)
from ..ingest.fault_tree import CriticalityPolicy, critical_paths, minimal_cutsets
from ..patterns import builtin_templates, dump_templates
from .dot import to_dot
from .interchange import from_interchange, to_interchange
from .report import render_report, trace_csv

log = logging.getLogger("hazarg")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_STRICT = 2

CASE_FILE = "case.json"
DOT_FILE = "case.dot"
REPORT_FILE = "report.txt"
TRACE_FILE = "trace.csv"
CATALOG_FILE = "catalog.yaml"


class InputError(HazargError):
    pass


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError("unreadable-input", f"cannot read input: {exc.strerror}", source=str(path)) from None


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    target = out / name
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    log.info("wrote %s", target)
    return target


def _policy(args: argparse.Namespace) -> CriticalityPolicy:
    try:
        return CriticalityPolicy(threshold=args.threshold, top_k=args.top_k)
    except ValueError as exc:
        raise InputError("bad-config", str(exc)) from None


def _load(args: argparse.Namespace) -> Sources:
    trees = tuple(parse_fault_tree(_read(p), str(p)) for p in args.fta or ())
    fmea = tuple(parse_fmea(_read(args.fmea), str(args.fmea))) if args.fmea else ()
    stpa = parse_stpa(_read(args.stpa), str(args.stpa)) if args.stpa else None
    cms: tuple = ()
    if args.cm:
        cms = tuple(load_countermeasures(_read(args.cm), trees=trees, fmea=fmea, stpa=stpa, source=str(args.cm)))
    if not trees and not fmea and stpa is None:
        raise InputError("no-artifacts", "give at least one of --fta, --fmea, --stpa")
    return Sources(trees, fmea, stpa, cms)


def _config(args: argparse.Namespace, sources: Sources) -> BuildConfig:
    if args.include:
        include = frozenset(Technique(t) for t in args.include)
    else:
        present = set()
        if sources.trees:
            present.add(Technique.FTA)
        if sources.fmea:
            present.add(Technique.FMEA)
        if sources.stpa is not None:
            present.add(Technique.STPA)
        include = frozenset(present)
    return BuildConfig(
        system_name=args.system,
        sequence=Sequence(args.sequence),
        policy=_policy(args),
        rpn_threshold=args.rpn_threshold,
        include=include,
        m_contexts=not args.no_m_contexts,
    )


def _use_color(stream) -> bool:  # type: ignore[no-untyped-def]
    return not os.environ.get("HAZARG_NO_COLOR") and hasattr(stream, "isatty") and stream.isatty()


# ---------------------------------------------------------------- subcommands


def cmd_ingest(args: argparse.Namespace) -> int:
    sources = _load(args)
    for tree in sources.trees:
        print(f"fault tree {tree.top}: {len(tree.basic_events())} basic events, {len(tree.gates)} gates")
    if sources.fmea:
        print(f"FMEA: {len(sources.fmea)} entries")
    if sources.stpa is not None:
        m = sources.stpa
        print(f"STPA: {len(m.accidents)} accidents, {len(m.hazards)} hazards, {len(m.ucas)} UCAs, {len(m.constraints)} constraints")
    if args.cm:
        print(f"countermeasures: {len(sources.countermeasures)} records")
    if args.out:
        for tree in sources.trees:
            _write(args.out, f"{tree.top}.ft", serialize_fault_tree(tree))
        if sources.fmea:
            _write(args.out, "fmea.csv", serialize_fmea(list(sources.fmea)))
        if sources.stpa is not None:
            _write(args.out, "stpa.yaml", serialize_stpa(sources.stpa))
        if args.cm:
            _write(args.out, "countermeasures.yaml", serialize_countermeasures(sources.countermeasures))
    return EXIT_OK


def cmd_cutsets(args: argparse.Namespace) -> int:
    policy = _policy(args)
    lines = []
    for path in args.fta:
        tree = parse_fault_tree(_read(path), str(path))
        cutsets = minimal_cutsets(tree)
        if all(c.probability is not None for c in cutsets):
            cutsets = critical_paths(cutsets, policy)
        lines.append(f"{tree.top}: {tree.top_event.label}")
        for c in cutsets:
            mark = "*" if c.critical else " "
            prob = "-" if c.probability is None else f"{c.probability:.6g}"
            lines.append(f" {mark} {{{', '.join(sorted(c.members))}}}  p={prob}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        _write(args.out, "cutsets.txt", text)
    return EXIT_OK


def cmd_build(args: argparse.Namespace) -> int:
    sources = _load(args)
    cfg = _config(args, sources)
    case = build_safety_case(sources.trees, sources.fmea, sources.stpa, sources.countermeasures, cfg)
    report = coverage(case, sources)
    _write(args.out, CASE_FILE, to_interchange(case))
    _write(args.out, DOT_FILE, to_dot(case))
    _write(args.out, REPORT_FILE, render_report(report, cross_links(case), cfg.sequence))
    _write(args.out, TRACE_FILE, trace_csv(report))
    log.info("%d modules, %d nodes", len(case.modules), sum(len(g) for g in case.modules.values()))
    if not report.is_empty:
        sys.stderr.write(render_report(report, cross_links(case), cfg.sequence, color=_use_color(sys.stderr)))
        if args.strict:
            return EXIT_STRICT
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    case = from_interchange(_read(args.case), str(args.case))
    problems = validate(case)
    if problems:
        for v in problems:
            log.error("%s: %s", v.code, v.message)
        return EXIT_STRICT if args.strict else EXIT_ERROR
    _write(args.out, DOT_FILE, to_dot(case, per_module=not args.flat))
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    sources = _load(args)
    if args.case:
        case = from_interchange(_read(args.case), str(args.case))
        expected = sources.restricted(BuildConfig.from_data(dict(case.meta["config"])).include).digests()  # type: ignore[arg-type]
        if case.meta.get("inputs") != expected:
            raise InputError("stale-case", "inputs differ from those the case was built from", source=str(args.case))
    else:
        case = build_safety_case(
            sources.trees, sources.fmea, sources.stpa, sources.countermeasures, _config(args, sources)
        )
    cfg = BuildConfig.from_data(dict(case.meta["config"]))  # type: ignore[arg-type]
    report = coverage(case, sources)
    sys.stdout.write(render_report(report, cross_links(case), cfg.sequence, color=_use_color(sys.stdout)))
    if args.out:
        _write(args.out, REPORT_FILE, render_report(report, cross_links(case), cfg.sequence))
        _write(args.out, TRACE_FILE, trace_csv(report))
    if args.strict and not report.is_empty:
        return EXIT_STRICT
    return EXIT_OK


def cmd_catalog(args: argparse.Namespace) -> int:
    text = dump_templates(builtin_templates())
    if args.out:
        _write(args.out, CATALOG_FILE, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _inputs(p: argparse.ArgumentParser, fta_required: bool = False) -> None:
    p.add_argument("--fta", type=Path, action="append", required=fta_required, help="fault tree file (repeatable)")
    p.add_argument("--fmea", type=Path, help="FMEA worksheet (CSV)")
    p.add_argument("--stpa", type=Path, help="STPA model (YAML)")
    p.add_argument("--cm", type=Path, help="countermeasure registry (YAML)")


def _policy_flags(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--threshold", type=float, help="critical-path probability threshold (default 1e-4)")
    group.add_argument("--top-k", type=int, help="treat the k most probable cutsets as critical")


def _build_flags(p: argparse.ArgumentParser) -> None:
    _policy_flags(p)
    p.add_argument("--system", default="the system", help="system name bound to S")
    p.add_argument("--sequence", choices=[s.value for s in Sequence], default=Sequence.TECHNIQUE_FIRST.value)
    p.add_argument("--rpn-threshold", type=int, default=100)
    p.add_argument("--include", action="append", choices=[t.value for t in Technique])
    p.add_argument("--no-m-contexts", action="store_true", help="omit the interpretation and range contexts on M")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hazarg", description="Hazard-analysis driven safety case construction.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="parse and validate input artifacts")
    _inputs(p)
    p.add_argument("--out", type=Path, help="write canonical copies of the inputs here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cutsets", parents=[common], help="print minimal cutsets and critical paths")
    _inputs(p, fta_required=True)
    _policy_flags(p)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_cutsets)

    p = sub.add_parser("build", parents=[common], help="assemble the safety case")
    _inputs(p)
    _build_flags(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--strict", action="store_true", help="exit 2 unless coverage is complete")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("render", parents=[common], help="interchange document to DOT")
    p.add_argument("--case", type=Path, required=True)
    p.add_argument("--flat", action="store_true", help="no per-module clusters")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("report", parents=[common], help="coverage report and trace matrix")
    _inputs(p)
    _build_flags(p)
    p.add_argument("--case", type=Path, help="previously built interchange document")
    p.add_argument("--out", type=Path)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("catalog", parents=[common], help="dump the builtin pattern catalog")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv: Seq[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="hazarg: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except HazargError as exc:
        sys.stderr.write(f"hazarg: error: {exc} [{exc.code}]\n")
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
