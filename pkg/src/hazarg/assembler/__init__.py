"""Build linked safety cases from hazard analyses and countermeasures."""

from .build import Sources, build_safety_case
from .config import BuildConfig, Sequence, Technique
from .coverage import CoverageReport, CrossLink, EvidenceGap, TraceRow, Uncovered, coverage, cross_links

__all__ = [
    "BuildConfig",
    "CoverageReport",
    "CrossLink",
    "EvidenceGap",
    "Sequence",
    "Sources",
    "Technique",
    "TraceRow",
    "Uncovered",
    "build_safety_case",
    "coverage",
    "cross_links",
]
