"""Parsers and analyses for the hazard-analysis inputs."""

from .countermeasures import (
    CountermeasureKind,
    CountermeasureRecord,
    Requirement,
    RequirementType,
    Target,
    TargetMode,
    load_countermeasures,
    serialize_countermeasures,
)
from .fault_tree import (
    CriticalityPolicy,
    Cutset,
    FaultTree,
    critical_paths,
    minimal_cutsets,
    parse_fault_tree,
    serialize_fault_tree,
)
from .fmea import FmeaEntry, high_rpn, parse_fmea, serialize_fmea
from .stpa import ConstraintKind, GuideWord, StpaModel, parse_stpa, serialize_stpa

__all__ = [
    "ConstraintKind",
    "CountermeasureKind",
    "CountermeasureRecord",
    "CriticalityPolicy",
    "Cutset",
    "FaultTree",
    "FmeaEntry",
    "GuideWord",
    "Requirement",
    "RequirementType",
    "StpaModel",
    "Target",
    "TargetMode",
    "critical_paths",
    "high_rpn",
    "load_countermeasures",
    "minimal_cutsets",
    "parse_fault_tree",
    "parse_fmea",
    "parse_stpa",
    "serialize_countermeasures",
    "serialize_fault_tree",
    "serialize_fmea",
    "serialize_stpa",
]
