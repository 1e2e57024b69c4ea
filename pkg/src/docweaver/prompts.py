"""Prompt builders for every agent role.

Each prompt opens with a distinctive heading line naming the role and the
component, which doubles as the hook scripted backends match on.
"""

from __future__ import annotations

from .catalog import CodeComponent
from .context import ContextBundle

READER_SYSTEM = (
    "You decide whether the provided context is enough to document a code "
    "component. You never write documentation yourself."
)
WRITER_SYSTEM = (
    "You write precise Google-style Python docstrings grounded strictly in "
    "the provided code and context. Never invent behavior."
)
VERIFIER_SYSTEM = (
    "You review docstring drafts for factual accuracy against the code, "
    "structural completeness, and clarity."
)
JUDGE_SYSTEM = (
    "You rate docstring quality on a fixed rubric and always answer in the "
    "requested JSON shape."
)
EXTRACTOR_SYSTEM = (
    "You list code entities mentioned in documentation, nothing else."
)


def render_bundle(bundle: ContextBundle) -> str:
    blocks = []
    for section in bundle.sections:
        marker = " (unavailable)" if section.error else ""
        blocks.append(f"[{section.label}] {section.title}{marker}\n{section.body}")
    return "\n\n".join(blocks)


def _facts(component: CodeComponent) -> str:
    lines = [
        f"kind: {component.kind}",
        f"visibility: {component.visibility}",
        f"parameters: {', '.join(component.parameters) or '(none)'}",
        f"returns a value: {'yes' if component.has_value_return else 'no'}",
        f"raises: {', '.join(component.raises) or '(none)'}",
    ]
    if component.kind == "class":
        attrs = ", ".join(component.class_attributes) or "(none)"
        lines.append(f"attributes: {attrs}")
    return "\n".join(lines)


def reader_prompt(
    component: CodeComponent, bundle: ContextBundle, guidance: str = ""
) -> list[dict]:
    text = (
        f"# Context check for {component.qualified_name}\n\n"
        "Decide whether the context below suffices to write an accurate "
        "docstring for the focal component.\n\n"
        f"Component facts:\n{_facts(component)}\n\n"
        f"Current context:\n{render_bundle(bundle)}\n\n"
    )
    if guidance:
        text += f"Reviewer guidance to address:\n{guidance}\n\n"
    text += (
        "If the context suffices, reply with exactly:\n"
        "<enough/>\n\n"
        "Otherwise request what is missing:\n"
        "<requests>\n"
        '  <dependency qualified_name="pkg.mod.fn"/>\n'
        '  <reference qualified_name="pkg.mod.Class.method"/>\n'
        "  <external><query>what to look up</query></external>\n"
        "</requests>\n\n"
        "dependency fetches a component this code relies on; reference "
        "fetches call sites showing how the focal component is used; "
        "external queries knowledge outside the repository. Reply with the "
        "XML only."
    )
    return [
        {"role": "system", "content": READER_SYSTEM},
        {"role": "user", "content": text},
    ]


_SECTION_GUIDES = {
    "function": (
        "Write a Google-style docstring with: a one-line summary; an "
        "optional description; an Args: section when there are parameters; "
        "a Returns: section when the code returns a value; a Raises: "
        "section when it raises; an Example: section when the component is "
        "public."
    ),
    "method": (
        "Write a Google-style docstring with: a one-line summary; an "
        "optional description; an Args: section when there are parameters; "
        "a Returns: section when the code returns a value; a Raises: "
        "section when it raises; an Example: section when the component is "
        "public."
    ),
    "class": (
        "Write a Google-style class docstring with: a one-line summary; an "
        "optional description; an Args: section describing constructor "
        "parameters when there are any; an Attributes: section when the "
        "class exposes public attributes; an Example: section when the "
        "class is public."
    ),
}


def writer_prompt(
    component: CodeComponent, bundle: ContextBundle, feedback: str = ""
) -> list[dict]:
    text = (
        f"# Docstring draft for {component.qualified_name}\n\n"
        f"{_SECTION_GUIDES[component.kind]}\n\n"
        f"Component facts:\n{_facts(component)}\n\n"
        f"Context:\n{render_bundle(bundle)}\n\n"
    )
    if feedback:
        text += f"Reviewer feedback to address:\n{feedback}\n\n"
    text += (
        "Reply with the docstring text only: no code, no surrounding "
        "triple quotes, no markdown fences."
    )
    return [
        {"role": "system", "content": WRITER_SYSTEM},
        {"role": "user", "content": text},
    ]


def verifier_prompt(
    component: CodeComponent, bundle: ContextBundle, draft: str
) -> list[dict]:
    text = (
        f"# Docstring review for {component.qualified_name}\n\n"
        "Review the draft below against three criteria:\n"
        "1. Accuracy: every claim matches the code and context.\n"
        "2. Completeness: required sections are present "
        "(see component facts).\n"
        "3. Clarity: the docstring helps a reader use the component.\n\n"
        f"Component facts:\n{_facts(component)}\n\n"
        f"Context:\n{render_bundle(bundle)}\n\n"
        f"Draft docstring:\n{draft}\n\n"
        "Reply with exactly one verdict element:\n"
        '<verdict status="approve"/>\n'
        "or\n"
        '<verdict status="revise">\n'
        '  <suggestion target="writer">what to change</suggestion>\n'
        "</verdict>\n"
        "or\n"
        '<verdict status="need_info">\n'
        '  <suggestion target="reader">what context is missing</suggestion>\n'
        "</verdict>\n\n"
        "revise suggestions must target the writer; need_info requires at "
        "least one suggestion targeting the reader. Reply with the XML only."
    )
    return [
        {"role": "system", "content": VERIFIER_SYSTEM},
        {"role": "user", "content": text},
    ]


def repair_prompt(component_name: str, reason: str, format_hint: str) -> str:
    return (
        f"# Format repair for {component_name}\n\n"
        f"Your previous reply could not be used: {reason}.\n"
        f"Reply again, following this format exactly:\n{format_hint}"
    )


HELPFULNESS_FACETS = ("summary", "description", "parameters")

_FACET_QUESTIONS = {
    "summary": "Does the first line state what the component does, precisely "
    "and without filler?",
    "description": "Does the prose explain behavior, intent, and edge cases "
    "beyond restating the signature?",
    "parameters": "Is every parameter described with its meaning and "
    "expectations, beyond repeating its name?",
}

_RUBRIC = (
    "Score rubric:\n"
    "5: excellent, a reader needs nothing else\n"
    "4: good, minor gaps\n"
    "3: adequate, notable gaps\n"
    "2: poor, mostly unhelpful\n"
    "1: missing or misleading\n\n"
    "Example of a 5 (summary facet): 'Apply the regional tax rate to a "
    "pre-tax amount.' Example of a 1: 'This function does things.'"
)


def helpfulness_prompt(
    component: CodeComponent, docstring: str, facet: str
) -> list[dict]:
    text = (
        f"# Helpfulness rating ({facet}) for {component.qualified_name}\n\n"
        f"Facet question: {_FACET_QUESTIONS[facet]}\n\n"
        f"{_RUBRIC}\n\n"
        "Steps: read the code, read the docstring, judge only the named "
        "facet, then answer.\n\n"
        f"Component source:\n{component.source_text}\n\n"
        f"Docstring under review:\n{docstring}\n\n"
        'Reply with JSON only: {"score": <1-5>, "reasoning": "...", '
        '"suggestions": ["..."]}'
    )
    return [
        {"role": "system", "content": JUDGE_SYSTEM},
        {"role": "user", "content": text},
    ]


def entity_prompt(component_name: str, docstring: str) -> list[dict]:
    text = (
        f"# Entity scan for {component_name}\n\n"
        "List every function, class, or method name this docstring claims "
        "exists in the same repository.\n"
        "Exclude: parameter names, local variables, Python builtins, "
        "standard library modules, and third-party packages.\n\n"
        f"Docstring:\n{docstring}\n\n"
        "Reply with the names only, one per line or comma separated, "
        "dotted paths allowed. Reply NONE if there are none."
    )
    return [
        {"role": "system", "content": EXTRACTOR_SYSTEM},
        {"role": "user", "content": text},
    ]
