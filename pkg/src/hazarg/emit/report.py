"""Human-readable coverage report and the CSV trace matrix."""

from __future__ import annotations

import csv
import io

from ..assembler.config import Sequence
from ..assembler.coverage import CoverageReport, CrossLink

ANSI = {"bold": "\033[1m", "red": "\033[31m", "green": "\033[32m", "reset": "\033[0m"}
TRACE_COLUMNS = ("source", "requirements", "countermeasures", "goals", "solutions")
SOURCE_GROUPS = (("cutset", "Critical paths (FTA)"), ("fmea", "High-RPN failure modes (FMEA)"), ("uca", "Unsafe control actions (STPA)"))


def render_report(
    report: CoverageReport,
    links: list[CrossLink] = (),  # type: ignore[assignment]
    sequence: Sequence = Sequence.TECHNIQUE_FIRST,
    color: bool = False,
) -> str:
    def paint(text: str, *styles: str) -> str:
        if not color:
            return text
        return "".join(ANSI[s] for s in styles) + text + ANSI["reset"]

    out: list[str] = []
    status = paint("COMPLETE", "bold", "green") if report.is_empty else paint("INCOMPLETE", "bold", "red")
    out.append(f"Coverage: {status}")
    out.append(
        f"  uncovered sources: {len(report.uncovered)}, undeveloped goals: {len(report.undeveloped)}, "
        f"evidence gaps: {len(report.evidence_gaps)}"
    )

    out.append("")
    out.append(paint("Uncovered sources", "bold"))
    out.extend(f"  {u.source}: {u.reason}" for u in report.uncovered)
    if not report.uncovered:
        out.append("  none")

    out.append("")
    out.append(paint("Undeveloped goals", "bold"))
    out.extend(f"  {g}" for g in report.undeveloped)
    if not report.undeveloped:
        out.append("  none")

    out.append("")
    out.append(paint("Evidence gaps", "bold"))
    out.extend(f"  {g.countermeasure}: missing {g.missing} evidence" for g in report.evidence_gaps)
    if not report.evidence_gaps:
        out.append("  none")

    if links:
        out.append("")
        out.append(paint("System-level events and argument directions", "bold"))
        for link in links:
            extra = f" ({', '.join(link.failure_modes)})" if link.failure_modes else ""
            out.append(f"  {link.event}: {' + '.join(link.via)}{extra}")

    out.append("")
    out.append(paint("Trace matrix", "bold"))
    if sequence is Sequence.TECHNIQUE_FIRST:
        for prefix, title in SOURCE_GROUPS:
            rows = [r for r in report.trace_matrix if r.source.startswith(prefix + ":")]
            if rows:
                out.append(f"  {title}")
                out.extend(_row_lines(rows, "    "))
    else:
        out.extend(_row_lines(sorted(report.trace_matrix, key=lambda r: r.source.split(":", 1)[1]), "  "))
    return "\n".join(out) + "\n"


def _row_lines(rows, indent: str) -> list[str]:  # type: ignore[no-untyped-def]
    lines = []
    for r in rows:
        lines.append(f"{indent}{r.source}")
        lines.append(f"{indent}  requirements:    {', '.join(r.requirements) or '-'}")
        lines.append(f"{indent}  countermeasures: {', '.join(r.countermeasures) or '-'}")
        lines.append(f"{indent}  goals:           {len(r.goals)}")
        lines.append(f"{indent}  solutions:       {len(r.solutions)}")
    return lines


def trace_csv(report: CoverageReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for r in report.trace_matrix:
        writer.writerow([r.source, ";".join(r.requirements), ";".join(r.countermeasures), ";".join(r.goals), ";".join(r.solutions)])
    return buf.getvalue()
