"""The bundled train door control system (TDCS) example."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .assembler import BuildConfig, Sources, Technique
from .ingest import load_countermeasures, parse_fault_tree, parse_fmea, parse_stpa

TDCS_SYSTEM = "train door control system"
TDCS_TREES = ("tdcs_open_doors.ft", "tdcs_emergency.ft")
TDCS_FMEA = "tdcs.csv"
TDCS_CM = "tdcs.cm.yaml"
TDCS_STPA = "tdcs.stpa.yaml"
TDCS_STPA_CM = "tdcs_stpa.cm.yaml"


def tdcs_dir() -> Path:
    return Path(str(resources.files("hazarg") / "data" / "tdcs"))


def _read(name: str) -> str:
    return (tdcs_dir() / name).read_text(encoding="utf-8")


def tdcs_sources(cm_text: str | None = None) -> Sources:
    """FTA + FMEA inputs of the example, optionally with a replaced registry."""
    trees = tuple(parse_fault_tree(_read(n), n) for n in TDCS_TREES)
    fmea = tuple(parse_fmea(_read(TDCS_FMEA), TDCS_FMEA))
    cms = load_countermeasures(
        cm_text if cm_text is not None else _read(TDCS_CM), trees=trees, fmea=fmea, source=TDCS_CM
    )
    return Sources(trees=trees, fmea=fmea, countermeasures=tuple(cms))


def tdcs_stpa_sources() -> Sources:
    model = parse_stpa(_read(TDCS_STPA), TDCS_STPA)
    cms = load_countermeasures(_read(TDCS_STPA_CM), stpa=model, source=TDCS_STPA_CM)
    return Sources(stpa=model, countermeasures=tuple(cms))


def tdcs_config(**overrides: object) -> BuildConfig:
    """Config for the example; by default only FTA and FMEA, as the CLI infers from its inputs."""
    values: dict[str, object] = {"include": frozenset({Technique.FTA, Technique.FMEA})}
    values.update(overrides)
    return BuildConfig(system_name=TDCS_SYSTEM, **values)  # type: ignore[arg-type]
