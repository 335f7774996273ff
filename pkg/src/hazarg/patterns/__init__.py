"""Argument pattern templates and their refinement and instantiation."""

from .engine import Binding, instance_id, instantiate, refine, template_diff
from .templates import (
    HC_REFINEMENTS,
    ChoiceGroup,
    ParamMode,
    PatternTemplate,
    TemplateLink,
    TemplateParam,
    builtin,
    builtin_templates,
    dump_templates,
    load_templates,
)

__all__ = [
    "Binding",
    "HC_REFINEMENTS",
    "ChoiceGroup",
    "ParamMode",
    "PatternTemplate",
    "TemplateLink",
    "TemplateParam",
    "builtin",
    "builtin_templates",
    "dump_templates",
    "instance_id",
    "instantiate",
    "load_templates",
    "refine",
    "template_diff",
]
