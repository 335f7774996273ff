"""YAML loading with line numbers for error messages."""

from __future__ import annotations

from typing import Any

import yaml

from ..errors import ParseError


class LineDict(dict):
    """A mapping remembering the (1-based) line it started on."""

    line: int | None = None


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader: _LineLoader, node: yaml.MappingNode) -> LineDict:
    mapping = LineDict(loader.construct_mapping(node, deep=True))
    mapping.line = node.start_mark.line + 1
    return mapping


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def load_document(text: str, source: str | None = None) -> Any:
    try:
        return yaml.load(text, Loader=_LineLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ParseError(
            "syntax-error",
            str(exc.problem or exc),
            source=source,
            line=mark.line + 1 if mark else None,
            column=mark.column + 1 if mark else None,
        ) from None


def dump_document(data: Any) -> str:
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True, default_flow_style=False, width=100)


class Fields:
    """Typed access to one mapping of a structured document."""

    def __init__(self, data: Any, what: str, source: str | None, line: int | None = None) -> None:
        if not isinstance(data, dict):
            raise ParseError("bad-value", f"{what} must be a mapping", source=source, line=line)
        self.data = data
        self.what = what
        self.source = source
        self.line = getattr(data, "line", line)

    def error(self, code: str, message: str) -> ParseError:
        return ParseError(code, message, source=self.source, line=self.line)

    def str(self, key: str, default: str | None = None, required: bool = True) -> str:
        value = self.data.get(key, default)
        if value is None:
            if required:
                raise self.error("missing-field", f"{self.what} lacks {key!r}")
            return ""
        if isinstance(value, (dict, list)):
            raise self.error("bad-value", f"{self.what} field {key!r} must be a scalar")
        return str(value)

    def opt(self, key: str) -> str | None:
        value = self.data.get(key)
        return None if value is None else self.str(key)

    def list(self, key: str, required: bool = False) -> list[Any]:
        value = self.data.get(key)
        if value is None:
            if required:
                raise self.error("missing-field", f"{self.what} lacks {key!r}")
            return []
        if not isinstance(value, list):
            raise self.error("bad-value", f"{self.what} field {key!r} must be a list")
        return value

    def strs(self, key: str) -> tuple[str, ...]:
        return tuple(str(v) for v in self.list(key))

    def sub(self, value: Any, what: str) -> "Fields":
        return Fields(value, what, self.source, self.line)
