"""Safety cases assembled from hazard analyses via GSN argument patterns.

Fault trees, FMEA worksheets and STPA models are combined with a registry of
countermeasures into a modular goal structure (modules M, CR and HC), which
can be validated, checked for coverage and rendered.
"""

from .assembler import BuildConfig, Sequence, Sources, Technique, build_safety_case, coverage, cross_links
from .emit import from_interchange, to_dot, to_interchange
from .errors import BuildError, GsnError, HazargError, ParseError, PatternError
from .gsn import EdgeKind, GsnEdge, GsnGraph, GsnNode, NodeKind, SafetyCase, undeveloped_goals, validate

__version__ = "0.1.0"

__all__ = [
    "BuildConfig",
    "BuildError",
    "EdgeKind",
    "GsnEdge",
    "GsnError",
    "GsnGraph",
    "GsnNode",
    "HazargError",
    "NodeKind",
    "ParseError",
    "PatternError",
    "SafetyCase",
    "Sequence",
    "Sources",
    "Technique",
    "build_safety_case",
    "coverage",
    "cross_links",
    "from_interchange",
    "to_dot",
    "to_interchange",
    "undeveloped_goals",
    "validate",
]
