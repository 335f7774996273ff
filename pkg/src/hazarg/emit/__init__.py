"""Serialisation, rendering and reporting of safety cases."""

from .dot import to_dot
from .interchange import from_interchange, to_interchange
from .report import render_report, trace_csv

__all__ = ["from_interchange", "render_report", "to_dot", "to_interchange", "trace_csv"]
