"""Structural completeness: which required docstring sections are present.

Deterministic and offline. Required sections come from the component's own
shape (parameters, returns, raises, visibility); presence comes from
Google-style header detection over the docstring text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .catalog import CodeComponent


class SectionKind(Enum):
    SUMMARY = "summary"
    DESCRIPTION = "description"
    ARGS = "args"
    RETURNS = "returns"
    RAISES = "raises"
    EXAMPLES = "examples"
    ATTRIBUTES = "attributes"


_HEADER_KINDS = {
    "Args": SectionKind.ARGS,
    "Arguments": SectionKind.ARGS,
    "Parameters": SectionKind.ARGS,
    "Returns": SectionKind.RETURNS,
    "Return": SectionKind.RETURNS,
    "Raises": SectionKind.RAISES,
    "Exceptions": SectionKind.RAISES,
    "Example": SectionKind.EXAMPLES,
    "Examples": SectionKind.EXAMPLES,
    "Usage": SectionKind.EXAMPLES,
    "Attributes": SectionKind.ATTRIBUTES,
}

# A header is a known token alone on its line: indentation, token, colon,
# trailing whitespace only.
_HEADER_RE = re.compile(r"^\s*([A-Za-z]+):\s*$")


@dataclass(frozen=True)
class CompletenessReport:
    component_name: str
    required: frozenset[SectionKind]
    present: frozenset[SectionKind]
    score: float


def required_sections(component: CodeComponent) -> set[SectionKind]:
    """Sections this component's docstring must carry. Never empty."""
    required = {SectionKind.SUMMARY}
    if component.parameters:
        required.add(SectionKind.ARGS)
    if component.kind == "class":
        if any(not a.startswith("_") for a in component.class_attributes):
            required.add(SectionKind.ATTRIBUTES)
    else:
        if component.has_value_return:
            required.add(SectionKind.RETURNS)
        if component.raises:
            required.add(SectionKind.RAISES)
    if component.visibility == "public":
        required.add(SectionKind.EXAMPLES)
    return required


def detect_sections(docstring: str | None) -> set[SectionKind]:
    """Sections actually present in the text.

    Summary is the first non-blank line. Description is any further
    non-blank prose before the first header. A header only counts when at
    least one non-blank line follows it before the next header.
    """
    if not docstring:
        return set()
    lines = docstring.splitlines()
    non_blank = [i for i, line in enumerate(lines) if line.strip()]
    if not non_blank:
        return set()

    headers: list[tuple[int, SectionKind]] = []
    for i, line in enumerate(lines):
        match = _HEADER_RE.match(line)
        if match and match.group(1) in _HEADER_KINDS:
            headers.append((i, _HEADER_KINDS[match.group(1)]))

    present = {SectionKind.SUMMARY}
    first_header = headers[0][0] if headers else len(lines)
    summary_line = non_blank[0]
    if any(summary_line < i < first_header for i in non_blank):
        present.add(SectionKind.DESCRIPTION)

    for pos, (start, kind) in enumerate(headers):
        end = headers[pos + 1][0] if pos + 1 < len(headers) else len(lines)
        if any(lines[j].strip() for j in range(start + 1, end)):
            present.add(kind)
    return present


def completeness_score(
    component: CodeComponent, docstring: str | None
) -> CompletenessReport:
    """Fraction of required sections present. Missing docstring scores 0."""
    required = required_sections(component)
    present = detect_sections(docstring)
    score = len(required & present) / len(required)
    assert 0.0 <= score <= 1.0
    return CompletenessReport(
        component_name=component.qualified_name,
        required=frozenset(required),
        present=frozenset(present),
        score=score,
    )
