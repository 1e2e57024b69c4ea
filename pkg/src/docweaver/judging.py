"""LLM-judged helpfulness, scored per facet on a 1..5 rubric.

Facets are summary, description, and (when the component has parameters)
parameters. Each facet costs one LLM call; a malformed rating gets one
repair re-prompt and is otherwise dropped from the overall mean.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field

from .catalog import CodeComponent
from .errors import GatewayError
from .llm import LlmGateway
from .prompts import HELPFULNESS_FACETS, helpfulness_prompt, repair_prompt

logger = logging.getLogger(__name__)

_SCORE_HINT = (
    'JSON object only: {"score": <integer 1-5>, "reasoning": "<text>", '
    '"suggestions": ["<text>"]}'
)


@dataclass
class HelpfulnessReport:
    component_name: str
    facet_scores: dict[str, int]
    reasonings: dict[str, str]
    overall: float | None
    incomplete: bool = False
    warnings: list[str] = field(default_factory=list)


def applicable_facets(component: CodeComponent) -> tuple[str, ...]:
    if component.parameters:
        return HELPFULNESS_FACETS
    return tuple(f for f in HELPFULNESS_FACETS if f != "parameters")


def _parse_judgment(text: str) -> tuple[int, str]:
    """Extract {score, reasoning}; raises ValueError on any malformation."""
    match = re.search(r"\{.*\}", text, re.DOTALL)
    if match is None:
        raise ValueError("no JSON object in reply")
    try:
        data = json.loads(match.group(0))
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}")
    if not isinstance(data, dict):
        raise ValueError("JSON reply is not an object")
    score = data.get("score")
    if isinstance(score, bool) or not isinstance(score, (int, float)):
        raise ValueError(f"score {score!r} is not a number")
    if isinstance(score, float):
        if not score.is_integer():
            raise ValueError(f"score {score!r} is not an integer")
        score = int(score)
    if not 1 <= score <= 5:
        raise ValueError(f"score {score} outside 1..5")
    reasoning = data.get("reasoning", "")
    return score, str(reasoning)


def judge_helpfulness(
    component: CodeComponent, docstring: str, gateway: LlmGateway
) -> HelpfulnessReport:
    """Rate one docstring facet by facet. Gateway failure marks the report
    incomplete and keeps whatever facets were already scored."""
    scores: dict[str, int] = {}
    reasonings: dict[str, str] = {}
    warnings: list[str] = []
    incomplete = False
    for facet in applicable_facets(component):
        messages = helpfulness_prompt(component, docstring, facet)
        try:
            raw = gateway.complete(messages).response
        except GatewayError as exc:
            warnings.append(f"judge gateway failed on facet {facet}: {exc}")
            incomplete = True
            break
        try:
            score, reasoning = _parse_judgment(raw)
        except ValueError as first_error:
            retry = messages + [
                {"role": "assistant", "content": raw},
                {
                    "role": "user",
                    "content": repair_prompt(
                        component.qualified_name, str(first_error), _SCORE_HINT
                    ),
                },
            ]
            try:
                raw = gateway.complete(retry).response
            except GatewayError as exc:
                warnings.append(f"judge gateway failed on facet {facet}: {exc}")
                incomplete = True
                break
            try:
                score, reasoning = _parse_judgment(raw)
            except ValueError as exc:
                warnings.append(f"facet {facet} unscored: {exc}")
                logger.warning(
                    "%s: helpfulness facet %s unscored (%s)",
                    component.qualified_name,
                    facet,
                    exc,
                )
                continue
        scores[facet] = score
        reasonings[facet] = reasoning
    overall = sum(scores.values()) / len(scores) if scores else None
    for value in scores.values():
        assert 1 <= value <= 5
    return HelpfulnessReport(
        component_name=component.qualified_name,
        facet_scores=scores,
        reasonings=reasonings,
        overall=overall,
        incomplete=incomplete,
        warnings=warnings,
    )
