"""Agent roles and the per-component orchestration loop.

Reader decides context adequacy and requests information; Searcher serves
requests with tools (no LLM); Writer drafts the docstring; Verifier
approves, sends the writer back, or routes to another reader cycle.

Every LLM-visible behavior is bounded: a global call budget of
max_outer_cycles * (reader_searcher + writer_verifier rounds) + 2 holds
regardless of what the model replies, with two calls held back from the
reader phase so each cycle can always afford a Writer and a Verifier.
Malformed replies get one repair re-prompt, then fail open.
"""

from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Callable

from .catalog import CodeComponent, ComponentCatalog, ComponentId
from .context import (
    ContextBundle,
    ContextSection,
    InfoRequest,
    TokenBudget,
    assemble_context,
    fulfill_external,
    fulfill_internal,
    truncate_to_budget,
)
from .errors import GatewayError, ReplyParseError
from .graph import DependencyGraph
from .llm import LlmGateway
from .prompts import (
    reader_prompt,
    repair_prompt,
    verifier_prompt,
    writer_prompt,
)

logger = logging.getLogger(__name__)

MODE_AGENT = "agent"
MODE_CHAT = "chat_baseline"

STATUS_APPROVED = "approved"
STATUS_LIMIT = "limit_reached"
STATUS_FAILED = "failed"

VERDICT_APPROVE = "approve"
VERDICT_REVISE = "revise"
VERDICT_NEED_INFO = "need_info"

_READER_HINT = (
    '<requests> containing <dependency qualified_name="..."/>, '
    '<reference qualified_name="..."/>, or <external><query>...</query>'
    "</external> children, or exactly <enough/> when nothing is missing"
)
_VERDICT_HINT = (
    '<verdict status="approve|revise|need_info"> with zero or more '
    '<suggestion target="writer|reader">text</suggestion> children; revise '
    "suggestions target the writer; need_info needs a reader suggestion"
)


@dataclass
class ReaderDecision:
    adequate: bool
    requests: list[InfoRequest] = field(default_factory=list)


@dataclass(frozen=True)
class Suggestion:
    target: str  # "writer" | "reader"
    text: str


@dataclass
class VerifierVerdict:
    status: str
    suggestions: list[Suggestion] = field(default_factory=list)


@dataclass
class IterationLimits:
    max_reader_searcher_rounds: int = 3
    max_writer_verifier_rounds: int = 2
    max_outer_cycles: int = 2

    @property
    def call_budget(self) -> int:
        per_cycle = self.max_reader_searcher_rounds + self.max_writer_verifier_rounds
        return self.max_outer_cycles * per_cycle + 2


@dataclass
class TranscriptEntry:
    role: str  # reader | searcher | writer | verifier
    prompt: str
    response: str
    note: str = ""
    parsed: dict | None = None


@dataclass
class GenerationRecord:
    component: ComponentId
    transcript: list[TranscriptEntry]
    final_docstring: str
    status: str
    rounds_used: dict
    warnings: list[str] = field(default_factory=list)


# -- reply parsing -------------------------------------------------------------


def parse_reader_reply(text: str) -> ReaderDecision:
    """Parse the reader's XML. Raises ReplyParseError on anything off-shape."""
    block = re.search(r"<requests\b.*?</requests>", text, re.DOTALL)
    if block is None:
        block = re.search(r"<requests\s*/>", text)
    if block is not None:
        try:
            element = ET.fromstring(block.group(0))
        except ET.ParseError as exc:
            raise ReplyParseError(f"requests block is not well-formed: {exc}")
        requests: list[InfoRequest] = []
        for child in element:
            if child.tag in ("dependency", "reference"):
                target = (child.get("qualified_name") or "").strip()
                if not target:
                    raise ReplyParseError(
                        f"<{child.tag}> is missing qualified_name"
                    )
                requests.append(
                    InfoRequest(
                        kind=child.tag,
                        target=target,
                        rationale=(child.get("rationale") or "").strip(),
                    )
                )
            elif child.tag == "external":
                query_el = child.find("query")
                query = (query_el.text or "").strip() if query_el is not None else ""
                if not query:
                    raise ReplyParseError("<external> is missing a <query>")
                requests.append(InfoRequest(kind="external", target=query))
            else:
                raise ReplyParseError(f"unknown request tag <{child.tag}>")
        return ReaderDecision(adequate=not requests, requests=requests)
    if re.search(r"<enough\s*/?>", text):
        return ReaderDecision(adequate=True)
    raise ReplyParseError("reply contains neither <requests> nor <enough/>")


def parse_verifier_reply(text: str) -> VerifierVerdict:
    """Parse the verifier's verdict XML, enforcing the routing invariants."""
    block = re.search(r"<verdict\b.*?</verdict>", text, re.DOTALL)
    if block is None:
        block = re.search(r"<verdict\b[^>]*/>", text)
    if block is None:
        raise ReplyParseError("reply contains no <verdict> element")
    try:
        element = ET.fromstring(block.group(0))
    except ET.ParseError as exc:
        raise ReplyParseError(f"verdict block is not well-formed: {exc}")
    status = element.get("status")
    if status not in (VERDICT_APPROVE, VERDICT_REVISE, VERDICT_NEED_INFO):
        raise ReplyParseError(f"unknown verdict status {status!r}")
    suggestions: list[Suggestion] = []
    for child in element:
        if child.tag != "suggestion":
            raise ReplyParseError(f"unknown verdict child <{child.tag}>")
        target = child.get("target")
        if target not in ("writer", "reader"):
            raise ReplyParseError(f"unknown suggestion target {target!r}")
        suggestions.append(Suggestion(target=target, text=(child.text or "").strip()))
    if status == VERDICT_APPROVE:
        suggestions = []  # approvals carry no work items
    if status == VERDICT_REVISE and any(s.target != "writer" for s in suggestions):
        raise ReplyParseError("revise suggestions must all target the writer")
    if status == VERDICT_NEED_INFO and not any(
        s.target == "reader" for s in suggestions
    ):
        raise ReplyParseError("need_info requires a reader-targeted suggestion")
    return VerifierVerdict(status=status, suggestions=suggestions)


def clean_docstring_reply(text: str) -> str:
    """Strip markdown fences and surrounding quotes from a writer reply."""
    out = text.strip()
    if out.startswith("```"):
        lines = out.splitlines()
        lines = lines[1:]
        if lines and lines[-1].strip().startswith("```"):
            lines = lines[:-1]
        out = "\n".join(lines).strip()
    for quote in ('"""', "'''"):
        if out.startswith(quote) and out.endswith(quote) and len(out) >= 2 * len(quote):
            out = out[len(quote) : -len(quote)].strip()
    return out


# -- searcher ------------------------------------------------------------------


def searcher_fulfill(
    requests: list[InfoRequest],
    catalog: ComponentCatalog,
    graph: DependencyGraph,
    doc_store: dict[str, str],
    retriever,
    max_call_sites: int = 3,
) -> list[ContextSection]:
    """Serve reader requests in order. Tool-driven; no LLM involved."""
    if not requests:
        raise ValueError("searcher needs at least one request")
    sections = []
    for request in requests:
        if request.kind in ("dependency", "reference"):
            sections.append(
                fulfill_internal(request, catalog, graph, doc_store, max_call_sites)
            )
        elif request.kind == "external":
            sections.append(fulfill_external(request, retriever))
        else:
            raise ValueError(f"unknown request kind {request.kind!r}")
    return sections


# -- orchestration -------------------------------------------------------------

EmitFn = Callable[[str, str | None, dict], None]


@dataclass
class AgentDeps:
    """Everything a component generation needs besides the component."""

    catalog: ComponentCatalog
    graph: DependencyGraph
    doc_store: dict[str, str]
    retriever: object | None = None
    max_call_sites: int = 3


class _Session:
    """Call accounting and transcript for one component."""

    # Calls held in reserve during the reader phase so a Writer + Verifier
    # pair always fits into the budget.
    WRITE_RESERVE = 2

    def __init__(
        self,
        component: CodeComponent,
        gateway: LlmGateway,
        budget: int,
        emit: EmitFn | None,
    ) -> None:
        self.component = component
        self.gateway = gateway
        self.budget = budget
        self.calls = 0
        self.transcript: list[TranscriptEntry] = []
        self.warnings: list[str] = []
        self.emit = emit

    def can_call(self, reserve: int = 0) -> bool:
        return self.calls + 1 <= self.budget - reserve

    def call(self, role: str, messages: list[dict], note: str = "") -> str:
        exchange = self.gateway.complete(messages)
        self.calls += 1
        self.transcript.append(
            TranscriptEntry(
                role=role,
                prompt=str(messages[-1]["content"]),
                response=exchange.response,
                note=note,
            )
        )
        self.step(role, {"note": note} if note else {})
        return exchange.response

    def step(self, step_name: str, payload: dict) -> None:
        if self.emit is not None:
            self.emit(
                "agent_step",
                self.component.qualified_name,
                {"step": step_name, **payload},
            )

    def warn(self, message: str) -> None:
        self.warnings.append(message)
        logger.warning("%s: %s", self.component.qualified_name, message)
        if self.emit is not None:
            self.emit(
                "warning", self.component.qualified_name, {"message": message}
            )


def _reader_step(
    session: _Session, bundle: ContextBundle, guidance: str
) -> ReaderDecision:
    messages = reader_prompt(session.component, bundle, guidance)
    raw = session.call("reader", messages)
    try:
        return parse_reader_reply(raw)
    except ReplyParseError as exc:
        if session.can_call(reserve=_Session.WRITE_RESERVE):
            retry = messages + [
                {"role": "assistant", "content": raw},
                {
                    "role": "user",
                    "content": repair_prompt(
                        session.component.qualified_name, str(exc), _READER_HINT
                    ),
                },
            ]
            raw = session.call("reader", retry, note="repair")
            try:
                return parse_reader_reply(raw)
            except ReplyParseError as exc2:
                exc = exc2
        session.warn(f"reader reply unusable, treating context as adequate: {exc}")
        return ReaderDecision(adequate=True)


def _writer_step(session: _Session, bundle: ContextBundle, feedback: str) -> str:
    messages = writer_prompt(session.component, bundle, feedback)
    raw = session.call("writer", messages)
    return clean_docstring_reply(raw)


def _verifier_step(
    session: _Session, bundle: ContextBundle, draft: str
) -> VerifierVerdict:
    messages = verifier_prompt(session.component, bundle, draft)
    raw = session.call("verifier", messages)
    try:
        return parse_verifier_reply(raw)
    except ReplyParseError as exc:
        if session.can_call():
            retry = messages + [
                {"role": "assistant", "content": raw},
                {
                    "role": "user",
                    "content": repair_prompt(
                        session.component.qualified_name, str(exc), _VERDICT_HINT
                    ),
                },
            ]
            raw = session.call("verifier", retry, note="repair")
            try:
                return parse_verifier_reply(raw)
            except ReplyParseError as exc2:
                exc = exc2
        session.warn(f"verifier reply unusable, forcing approval: {exc}")
        return VerifierVerdict(status=VERDICT_APPROVE)


def _searcher_step(
    session: _Session, requests: list[InfoRequest], deps: AgentDeps
) -> list[ContextSection]:
    sections = searcher_fulfill(
        requests,
        deps.catalog,
        deps.graph,
        deps.doc_store,
        deps.retriever,
        deps.max_call_sites,
    )
    summary = [
        {
            "label": s.label,
            "title": s.title,
            "body": s.body,
            "error": s.error,
        }
        for s in sections
    ]
    session.transcript.append(
        TranscriptEntry(
            role="searcher",
            prompt="; ".join(f"{r.kind}:{r.target}" for r in requests),
            response="\n".join(s.title for s in sections),
            parsed={"sections": summary},
        )
    )
    session.step("searcher", {"served": len(sections)})
    return sections


def orchestrate_component(
    component: CodeComponent,
    deps: AgentDeps,
    gateway: LlmGateway,
    limits: IterationLimits | None = None,
    budget: TokenBudget = TokenBudget(limit=8192),
    mode: str = MODE_AGENT,
    emit: EmitFn | None = None,
) -> GenerationRecord:
    """Run the agent loop (or the chat baseline) for one component."""
    limits = limits or IterationLimits()
    session = _Session(component, gateway, limits.call_budget, emit)
    if mode == MODE_CHAT:
        return _chat_baseline(session, budget)
    if mode != MODE_AGENT:
        raise ValueError(f"unknown generation mode {mode!r}")

    sections: list[ContextSection] = []
    draft: str | None = None
    status: str | None = None
    feedback = ""
    guidance = ""
    reader_rounds = 0
    writer_rounds = 0
    cycles = 0

    try:
        while cycles < limits.max_outer_cycles:
            cycles += 1

            rounds = 0
            while rounds < limits.max_reader_searcher_rounds and session.can_call(
                reserve=_Session.WRITE_RESERVE
            ):
                bundle = assemble_context(component, sections)
                decision = _reader_step(session, bundle, guidance)
                guidance = ""
                rounds += 1
                reader_rounds += 1
                if decision.adequate:
                    break
                sections.extend(_searcher_step(session, decision.requests, deps))

            bundle = truncate_to_budget(
                assemble_context(component, sections), budget
            )

            verdict: VerifierVerdict | None = None
            wrounds = 0
            while wrounds < limits.max_writer_verifier_rounds:
                if not session.can_call():
                    status = STATUS_LIMIT
                    break
                draft = _writer_step(session, bundle, feedback)
                wrounds += 1
                writer_rounds += 1
                if not session.can_call():
                    status = STATUS_LIMIT
                    break
                verdict = _verifier_step(session, bundle, draft)
                if verdict.status == VERDICT_APPROVE:
                    status = STATUS_APPROVED
                    break
                feedback = "\n".join(
                    s.text for s in verdict.suggestions if s.target == "writer"
                )
                if verdict.status == VERDICT_NEED_INFO:
                    guidance = "\n".join(
                        s.text for s in verdict.suggestions if s.target == "reader"
                    )
                    break

            if status in (STATUS_APPROVED, STATUS_LIMIT):
                break
            if verdict is not None and verdict.status == VERDICT_NEED_INFO:
                if cycles < limits.max_outer_cycles and session.can_call(
                    reserve=_Session.WRITE_RESERVE
                ):
                    continue
                status = STATUS_LIMIT
                break
            # writer/verifier rounds exhausted on revise
            status = STATUS_LIMIT
            break
    except GatewayError as exc:
        session.warn(f"llm gateway failed: {exc}")
        return GenerationRecord(
            component=component.id,
            transcript=session.transcript,
            final_docstring="",
            status=STATUS_FAILED,
            rounds_used=_rounds(reader_rounds, writer_rounds, cycles, session.calls),
            warnings=session.warnings,
        )

    if status is None:
        status = STATUS_LIMIT
    return GenerationRecord(
        component=component.id,
        transcript=session.transcript,
        final_docstring=draft or "",
        status=status,
        rounds_used=_rounds(reader_rounds, writer_rounds, cycles, session.calls),
        warnings=session.warnings,
    )


def _chat_baseline(session: _Session, budget: TokenBudget) -> GenerationRecord:
    """Single writer-style prompt over the focal code alone."""
    bundle = truncate_to_budget(
        assemble_context(session.component, []), budget
    )
    try:
        draft = _writer_step(session, bundle, "")
    except GatewayError as exc:
        session.warn(f"llm gateway failed: {exc}")
        return GenerationRecord(
            component=session.component.id,
            transcript=session.transcript,
            final_docstring="",
            status=STATUS_FAILED,
            rounds_used=_rounds(0, 1, 0, session.calls),
            warnings=session.warnings,
        )
    return GenerationRecord(
        component=session.component.id,
        transcript=session.transcript,
        final_docstring=draft,
        status=STATUS_APPROVED,
        rounds_used=_rounds(0, 1, 0, session.calls),
        warnings=session.warnings,
    )


def _rounds(reader: int, writer: int, cycles: int, calls: int) -> dict:
    return {
        "reader_searcher": reader,
        "writer_verifier": writer,
        "outer_cycles": cycles,
        "llm_calls": calls,
    }
