"""Plan-order generation driver.

Walks the processing plan strictly in order, runs the agent loop (or chat
baseline) per component, and commits accepted docstrings to the shared doc
store so later components see generated text instead of bare source.
"""

from __future__ import annotations

import logging
from typing import Callable

from .agents import (
    MODE_AGENT,
    STATUS_APPROVED,
    STATUS_LIMIT,
    AgentDeps,
    EmitFn,
    GenerationRecord,
    IterationLimits,
    TranscriptEntry,
    orchestrate_component,
)
from .catalog import ComponentCatalog, ComponentId, is_documented
from .context import TokenBudget
from .graph import DependencyGraph
from .llm import LlmGateway
from .planning import ProcessingPlan

logger = logging.getLogger(__name__)

CommitFn = Callable[[GenerationRecord], None]


def seed_doc_store(catalog: ComponentCatalog, doc_store: dict[str, str]) -> None:
    """Expose pre-existing docstrings as dependency context.

    setdefault so docstrings restored from a previous partial run win.
    """
    for component in catalog.components:
        if is_documented(component):
            doc_store.setdefault(
                component.qualified_name, component.existing_docstring
            )


def run_pipeline(
    catalog: ComponentCatalog,
    graph: DependencyGraph,
    plan: ProcessingPlan,
    gateway: LlmGateway,
    doc_store: dict[str, str] | None = None,
    retriever=None,
    limits: IterationLimits | None = None,
    budget: TokenBudget = TokenBudget(limit=8192),
    mode: str = MODE_AGENT,
    max_call_sites: int = 3,
    overwrite_existing: bool = False,
    completed: set[str] | None = None,
    emit: EmitFn | None = None,
    on_commit: CommitFn | None = None,
) -> list[GenerationRecord]:
    """Generate docstrings for every planned component, in plan order.

    `completed` names components already finished by an earlier partial run;
    they are skipped without events (their events were already written).
    A commit happens before the next component starts, so an interrupt
    never loses an accepted docstring.
    """
    doc_store = doc_store if doc_store is not None else {}
    completed = completed or set()
    seed_doc_store(catalog, doc_store)
    deps = AgentDeps(
        catalog=catalog,
        graph=graph,
        doc_store=doc_store,
        retriever=retriever,
        max_call_sites=max_call_sites,
    )

    records: list[GenerationRecord] = []
    for cid in plan.order:
        name = cid.qualified_name
        if name in completed:
            continue
        component = catalog.get(name)
        if is_documented(component) and not overwrite_existing:
            if emit is not None:
                emit("component_done", name, {"status": "skipped"})
            continue
        if emit is not None:
            emit("component_started", name, {"kind": component.kind})
        record = orchestrate_component(
            component,
            deps,
            gateway,
            limits=limits,
            budget=budget,
            mode=mode,
            emit=emit,
        )
        records.append(record)
        if record.status in (STATUS_APPROVED, STATUS_LIMIT) and record.final_docstring:
            doc_store[name] = record.final_docstring
        if on_commit is not None:
            on_commit(record)
        if emit is not None:
            emit(
                "component_done",
                name,
                {"status": record.status, "rounds": record.rounds_used},
            )
    if emit is not None:
        emit(
            "run_done",
            None,
            {
                "components": len(records),
                "approved": sum(1 for r in records if r.status == STATUS_APPROVED),
            },
        )
    return records


# -- transcript serialization --------------------------------------------------


def record_to_dict(record: GenerationRecord) -> dict:
    return {
        "component": record.component.qualified_name,
        "file_path": record.component.file_path,
        "line_span": list(record.component.line_span),
        "status": record.status,
        "final_docstring": record.final_docstring,
        "rounds_used": record.rounds_used,
        "warnings": list(record.warnings),
        "transcript": [
            {
                "role": e.role,
                "prompt": e.prompt,
                "response": e.response,
                "note": e.note,
                "parsed": e.parsed,
            }
            for e in record.transcript
        ],
    }


def record_from_dict(data: dict) -> GenerationRecord:
    return GenerationRecord(
        component=ComponentId(
            qualified_name=data["component"],
            file_path=data["file_path"],
            line_span=tuple(data["line_span"]),
        ),
        transcript=[
            TranscriptEntry(
                role=e["role"],
                prompt=e["prompt"],
                response=e["response"],
                note=e.get("note", ""),
                parsed=e.get("parsed"),
            )
            for e in data.get("transcript", [])
        ],
        final_docstring=data["final_docstring"],
        status=data["status"],
        rounds_used=data["rounds_used"],
        warnings=list(data.get("warnings", [])),
    )
