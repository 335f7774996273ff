"""FMEA worksheets as comma-separated tables.

Header (column order is free, extra columns are ignored)::

    id,item,failure_mode,effects,causes,severity,occurrence,detection,mitigations

``effects``, ``causes`` and ``mitigations`` hold ``;``-separated lists. An
effect written as ``event:<fault tree top id>`` links the failure mode to a
system-level event analysed by FTA.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from ..errors import ParseError

COLUMNS = (
    "id",
    "item",
    "failure_mode",
    "effects",
    "causes",
    "severity",
    "occurrence",
    "detection",
    "mitigations",
)
RATING_RANGE = range(1, 11)
EVENT_LINK_PREFIX = "event:"


@dataclass(frozen=True)
class FmeaEntry:
    id: str
    item: str
    failure_mode: str
    effects: tuple[str, ...]
    causes: tuple[str, ...]
    severity: int
    occurrence: int
    detection: int
    mitigations: tuple[str, ...] = ()

    @property
    def rpn(self) -> int:
        return self.severity * self.occurrence * self.detection

    @property
    def source_key(self) -> str:
        return f"fmea:{self.id}"

    @property
    def linked_events(self) -> tuple[str, ...]:
        """Fault tree top events named among the effects."""
        return tuple(e[len(EVENT_LINK_PREFIX):] for e in self.effects if e.startswith(EVENT_LINK_PREFIX))


def _split(cell: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in cell.split(";") if part.strip())


def parse_fmea(text: str, source: str | None = None) -> list[FmeaEntry]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("missing-column", "empty FMEA table", source=source, line=1) from None
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise ParseError("missing-column", f"missing column(s): {', '.join(missing)}", source=source, line=1)
    index = {name: header.index(name) for name in COLUMNS}

    entries: list[FmeaEntry] = []
    seen: set[str] = set()
    for row in reader:
        line = reader.line_num
        if not any(cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            raise ParseError("missing-column", f"row has {len(row)} cells, header has {len(header)}", source=source, line=line)
        cell = {name: row[i].strip() for name, i in index.items()}
        if not cell["id"]:
            raise ParseError("missing-value", "row without id", source=source, line=line)
        if cell["id"] in seen:
            raise ParseError("duplicate-id", f"duplicate entry id {cell['id']!r}", source=source, line=line)
        seen.add(cell["id"])
        if not cell["failure_mode"]:
            raise ParseError("missing-value", f"entry {cell['id']!r} has no failure mode", source=source, line=line)
        ratings = {}
        for name in ("severity", "occurrence", "detection"):
            try:
                value = int(cell[name])
            except ValueError:
                value = None
            if value not in RATING_RANGE:
                raise ParseError(
                    "bad-rating",
                    f"{name} of {cell['id']!r} must be an integer in 1..10, got {cell[name]!r}",
                    source=source,
                    line=line,
                    column=index[name] + 1,
                )
            ratings[name] = value
        entries.append(
            FmeaEntry(
                id=cell["id"],
                item=cell["item"],
                failure_mode=cell["failure_mode"],
                effects=_split(cell["effects"]),
                causes=_split(cell["causes"]),
                mitigations=_split(cell["mitigations"]),
                **ratings,
            )
        )
    return entries


def serialize_fmea(entries: list[FmeaEntry]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for e in entries:
        writer.writerow(
            [
                e.id,
                e.item,
                e.failure_mode,
                ";".join(e.effects),
                ";".join(e.causes),
                e.severity,
                e.occurrence,
                e.detection,
                ";".join(e.mitigations),
            ]
        )
    return out.getvalue()


def high_rpn(entries: list[FmeaEntry], threshold: int) -> list[FmeaEntry]:
    """Entries with ``rpn >= threshold``, highest RPN first, ties by id."""
    return sorted((e for e in entries if e.rpn >= threshold), key=lambda e: (-e.rpn, e.id))
