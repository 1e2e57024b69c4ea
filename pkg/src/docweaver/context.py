"""Context assembly and budget-aware truncation.

A context bundle is an ordered list of labeled sections. The focal
component's own source always comes first and is never truncated; the
remaining sections shrink from the end, largest first, down to a small
floor, until the bundle fits the token budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .catalog import CodeComponent, ComponentCatalog
from .errors import BudgetExceededError
from .graph import DependencyGraph, call_sites

LABEL_FOCAL = "focal_code"
LABEL_DEPENDENCY = "dependency"
LABEL_REFERENCE = "reference"
LABEL_EXTERNAL = "external_knowledge"
LABEL_ORDER = (LABEL_FOCAL, LABEL_DEPENDENCY, LABEL_REFERENCE, LABEL_EXTERNAL)

# Sections are never shrunk below this many estimated tokens.
SECTION_FLOOR_TOKENS = 10
_LAST_LINE_KEEP_CHARS = SECTION_FLOOR_TOKENS * 4

DISABLED_EXTERNAL_TEXT = "external retrieval disabled"
NO_RESULT_TEXT = "no external result"
NO_CALL_SITES_TEXT = "no call sites found"


def estimate_tokens(text: str) -> int:
    """Character-based token estimate: ceil(len / 4)."""
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class InfoRequest:
    kind: str  # "dependency" | "reference" | "external"
    target: str  # qualified name, or the query text for external requests
    rationale: str = ""


@dataclass(frozen=True)
class ContextSection:
    label: str
    title: str
    body: str
    error: bool = False
    token_estimate: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "token_estimate", estimate_tokens(self.body))


@dataclass(frozen=True)
class TokenBudget:
    limit: int


@dataclass
class ContextBundle:
    sections: list[ContextSection]

    @property
    def total_tokens(self) -> int:
        return sum(s.token_estimate for s in self.sections)

    @property
    def focal(self) -> ContextSection:
        return self.sections[0]


def focal_section(component: CodeComponent) -> ContextSection:
    return ContextSection(
        label=LABEL_FOCAL,
        title=component.qualified_name,
        body=component.source_text,
    )


def assemble_context(
    component: CodeComponent, sections: list[ContextSection]
) -> ContextBundle:
    """Order sections by label group and collapse duplicate (label, title).

    Later sections win over earlier duplicates (newest body), keeping the
    first occurrence's position. The focal section is synthesized from the
    component and always leads.
    """
    deduped: dict[tuple[str, str], ContextSection] = {}
    order: list[tuple[str, str]] = []
    for section in sections:
        if section.label == LABEL_FOCAL:
            continue  # only one focal section, built here
        key = (section.label, section.title)
        if key not in deduped:
            order.append(key)
        deduped[key] = section

    rank = {label: i for i, label in enumerate(LABEL_ORDER)}
    ordered_keys = sorted(
        order, key=lambda key: (rank.get(key[0], len(rank)), order.index(key))
    )
    result = [focal_section(component)]
    result.extend(deduped[key] for key in ordered_keys)
    return ContextBundle(sections=result)


def fulfill_internal(
    request: InfoRequest,
    catalog: ComponentCatalog,
    graph: DependencyGraph,
    doc_store: dict[str, str],
    max_call_sites: int = 3,
) -> ContextSection:
    """Serve a dependency or reference request from the analyzed repo.

    Dependency sections prefer the freshest docstring in doc_store and fall
    back to raw source. Reference sections carry up to max_call_sites call
    snippets. Unknown names come back as error sections so the reader can
    react instead of crashing the run.
    """
    if request.kind == "dependency":
        comp = catalog.get(request.target)
        if comp is None:
            return ContextSection(
                label=LABEL_DEPENDENCY,
                title=request.target,
                body=f"not found: {request.target}",
                error=True,
            )
        doc = doc_store.get(comp.qualified_name)
        body = doc if doc else comp.source_text
        return ContextSection(
            label=LABEL_DEPENDENCY, title=comp.qualified_name, body=body
        )
    if request.kind == "reference":
        comp = catalog.get(request.target)
        if comp is None:
            return ContextSection(
                label=LABEL_REFERENCE,
                title=request.target,
                body=f"not found: {request.target}",
                error=True,
            )
        sites = call_sites(comp.qualified_name, catalog, graph)[:max_call_sites]
        if not sites:
            return ContextSection(
                label=LABEL_REFERENCE,
                title=comp.qualified_name,
                body=NO_CALL_SITES_TEXT,
            )
        parts = [
            f"called from {s.caller.qualified_name} (line {s.line}):\n{s.snippet}"
            for s in sites
        ]
        return ContextSection(
            label=LABEL_REFERENCE,
            title=comp.qualified_name,
            body="\n\n".join(parts),
        )
    raise ValueError(f"fulfill_internal cannot serve kind {request.kind!r}")


def fulfill_external(request: InfoRequest, retriever) -> ContextSection:
    """Serve an external-knowledge request through the configured retriever."""
    if retriever is None:
        return ContextSection(
            label=LABEL_EXTERNAL, title=request.target, body=DISABLED_EXTERNAL_TEXT
        )
    try:
        body = retriever.retrieve(request.target)
    except LookupError:
        return ContextSection(
            label=LABEL_EXTERNAL,
            title=request.target,
            body=NO_RESULT_TEXT,
            error=True,
        )
    except Exception as exc:  # transport failure; reader sees it as a section
        return ContextSection(
            label=LABEL_EXTERNAL,
            title=request.target,
            body=f"external retrieval failed: {exc}",
            error=True,
        )
    return ContextSection(label=LABEL_EXTERNAL, title=request.target, body=body)


def truncate_to_budget(bundle: ContextBundle, budget: TokenBudget) -> ContextBundle:
    """Shrink the bundle until it fits the budget.

    Repeatedly picks the largest non-focal section (ties broken by title)
    and drops whole lines from its end; a section stops shrinking at the
    token floor, and a single oversized line is cut to the floor's char
    equivalent. The focal section is never touched. A budget below the
    focal section's own size is unsatisfiable.
    """
    focal = bundle.focal
    if focal.label != LABEL_FOCAL:
        raise ValueError("bundle must start with the focal section")
    if budget.limit < focal.token_estimate:
        raise BudgetExceededError(
            f"budget {budget.limit} is below the focal section's "
            f"{focal.token_estimate} tokens"
        )
    if bundle.total_tokens <= budget.limit:
        return bundle

    sections = list(bundle.sections)

    def total() -> int:
        return sum(s.token_estimate for s in sections)

    while total() > budget.limit:
        candidates = [
            i
            for i, s in enumerate(sections)
            if i > 0 and s.token_estimate > SECTION_FLOOR_TOKENS
        ]
        if not candidates:
            break
        pick = min(
            candidates, key=lambda i: (-sections[i].token_estimate, sections[i].title)
        )
        sections[pick] = _shrink_section(
            sections[pick], total() - budget.limit
        )
    return ContextBundle(sections=sections)


def _shrink_section(section: ContextSection, overshoot: int) -> ContextSection:
    """Drop whole lines from the end until the section reaches its target.

    The target never goes below the floor. When a single line remains and
    still exceeds the target, it is cut at the target's char equivalent.
    """
    target = max(SECTION_FLOOR_TOKENS, section.token_estimate - overshoot)
    lines = section.body.splitlines()
    body = "\n".join(lines)
    while len(lines) > 1 and estimate_tokens(body) > target:
        lines.pop()
        body = "\n".join(lines)
    if len(lines) <= 1 and estimate_tokens(body) > target:
        body = body[: target * 4]
    return ContextSection(
        label=section.label, title=section.title, body=body, error=section.error
    )
