"""Truthfulness: do the entities a docstring mentions actually exist?

An LLM pass extracts repository-entity mentions; each mention is then
checked against the catalog with the same resolution rule the graph uses.
Existence Ratio = |verified| / |extracted|, defined as 1.0 when nothing
was extracted (no mentions, no hallucinations).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .catalog import CodeComponent, ComponentCatalog
from .errors import GatewayError
from .graph import resolve_entity
from .llm import LlmGateway
from .prompts import entity_prompt, repair_prompt

logger = logging.getLogger(__name__)

_MENTION_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")
_ENTITY_HINT = (
    "bare dotted names only, one per line or comma separated "
    "(e.g. pkg.mod.fn, Helper), or NONE"
)


@dataclass
class TruthfulnessReport:
    component_name: str
    extracted: list[str]
    verified: list[str]
    existence_ratio: float
    incomplete: bool = False
    warnings: list[str] = field(default_factory=list)


def parse_mentions(text: str) -> list[str] | None:
    """Split a reply into mention tokens; None when any token is prose.

    Accepts commas, semicolons, or newlines as separators; strips quotes,
    backticks, and a trailing call marker. NONE (or nothing) means no
    mentions.
    """
    stripped = text.strip()
    if not stripped or stripped.strip("`'\"").upper() == "NONE":
        return []
    mentions: list[str] = []
    for token in re.split(r"[,;\n]+", stripped):
        token = token.strip().strip("`'\"")
        if token.endswith("()"):
            token = token[:-2]
        token = token.strip()
        if not token:
            continue
        if token.startswith("-") or token.startswith("*"):
            token = token[1:].strip().strip("`'\"")
        if not _MENTION_RE.match(token):
            return None
        mentions.append(token)
    return mentions


def _dedup(mentions: list[str]) -> list[str]:
    seen = set()
    out = []
    for mention in mentions:
        if mention not in seen:
            seen.add(mention)
            out.append(mention)
    return out


def extract_entities(
    docstring: str,
    gateway: LlmGateway,
    component_name: str = "docstring",
    warnings: list[str] | None = None,
) -> list[str]:
    """Entity mentions named by the docstring, deduplicated, first-seen order.

    An unparseable reply gets one repair re-prompt; if that also fails the
    extraction is empty and a warning is recorded.
    """
    sink = warnings if warnings is not None else []
    messages = entity_prompt(component_name, docstring)
    raw = gateway.complete(messages).response
    mentions = parse_mentions(raw)
    if mentions is None:
        retry = messages + [
            {"role": "assistant", "content": raw},
            {
                "role": "user",
                "content": repair_prompt(
                    component_name, "reply was not a bare name list", _ENTITY_HINT
                ),
            },
        ]
        raw = gateway.complete(retry).response
        mentions = parse_mentions(raw)
        if mentions is None:
            sink.append("entity extraction unparseable after repair, dropped")
            logger.warning(
                "%s: entity extraction unparseable after repair", component_name
            )
            mentions = []
    return _dedup(mentions)


def verify_entities(
    component: CodeComponent,
    mentions: list[str],
    catalog: ComponentCatalog,
    warnings: list[str] | None = None,
) -> TruthfulnessReport:
    """Check each mention against the catalog; ambiguous counts as missing."""
    verified = []
    for mention in mentions:
        resolution = resolve_entity(mention, catalog)
        if resolution.resolved is not None and not resolution.ambiguous:
            verified.append(mention)
    ratio = len(verified) / len(mentions) if mentions else 1.0
    assert 0.0 <= ratio <= 1.0
    assert set(verified) <= set(mentions)
    return TruthfulnessReport(
        component_name=component.qualified_name,
        extracted=list(mentions),
        verified=verified,
        existence_ratio=ratio,
        warnings=list(warnings or []),
    )


def evaluate_truthfulness(
    component: CodeComponent,
    docstring: str,
    catalog: ComponentCatalog,
    gateway: LlmGateway,
) -> TruthfulnessReport:
    """Extraction plus verification; gateway failure marks it incomplete."""
    warnings: list[str] = []
    try:
        mentions = extract_entities(
            docstring, gateway, component.qualified_name, warnings
        )
    except GatewayError as exc:
        warnings.append(f"extractor gateway failed: {exc}")
        report = TruthfulnessReport(
            component_name=component.qualified_name,
            extracted=[],
            verified=[],
            existence_ratio=1.0,
            incomplete=True,
            warnings=warnings,
        )
        return report
    return verify_entities(component, mentions, catalog, warnings)
