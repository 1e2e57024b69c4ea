"""End-to-end run execution and evaluation wiring.

Everything that can fail from bad configuration (gateway, retriever,
paths) is constructed before the first byte is written, so a misconfigured
generate exits without leaving a half-built run directory.
"""

from __future__ import annotations

import datetime
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .agents import STATUS_APPROVED, STATUS_LIMIT, GenerationRecord
from .catalog import ComponentCatalog, is_documented, parse_repository
from .completeness import CompletenessReport, completeness_score
from .config import RunConfig, config_to_dict
from .errors import ConfigurationError, ResumeError
from .graph import (
    CondensedGraph,
    DependencyGraph,
    condense_sccs,
    extract_dependencies,
)
from .judging import HelpfulnessReport, judge_helpfulness
from .llm import LlmConfig, LlmGateway
from .pipeline import record_to_dict, run_pipeline, seed_doc_store
from .planning import ProcessingPlan, topological_plan
from .reporting import EvaluationSummary, aggregate, report_payload
from .truthfulness import TruthfulnessReport, evaluate_truthfulness
from .workspace import (
    EVENTS_FILE,
    PATCHED_DIR,
    EventLog,
    RunLock,
    RunState,
    SourceWorkspace,
    check_resumable,
    ensure_run_dir,
    load_state,
    new_run_id,
    repo_fingerprint,
    save_state,
    save_transcript,
)

GRAPH_FILE = "graph.json"

AXES = ("completeness", "helpfulness", "truthfulness")

EmitFn = Callable[[dict], None]


# -- analysis ---------------------------------------------------------------------


@dataclass
class AnalysisResult:
    catalog: ComponentCatalog
    graph: DependencyGraph
    condensed: CondensedGraph
    plan: ProcessingPlan


def analyze(config: RunConfig) -> AnalysisResult:
    root = Path(config.repo_path)
    if not root.is_dir():
        raise ConfigurationError(f"repo_path is not a directory: {config.repo_path}")
    catalog = parse_repository(root)
    graph = extract_dependencies(catalog)
    condensed = condense_sccs(graph)
    plan = topological_plan(catalog, condensed, mode=config.order, seed=config.seed)
    return AnalysisResult(catalog, graph, condensed, plan)


def graph_export(analysis: AnalysisResult) -> dict:
    """JSON-ready snapshot of the whole static-analysis stage."""
    catalog = analysis.catalog
    components = []
    for c in catalog.components:
        components.append(
            {
                "qualified_name": c.qualified_name,
                "file_path": c.file_path,
                "line_span": list(c.id.line_span),
                "kind": c.kind,
                "visibility": c.visibility,
                "parameters": list(c.parameters),
                "has_value_return": c.has_value_return,
                "raises": list(c.raises),
                "parent": c.parent.qualified_name if c.parent else None,
                "class_attributes": list(c.class_attributes),
                "documented": is_documented(c),
            }
        )
    edges = sorted(
        {
            (e.src.qualified_name, e.dst.qualified_name, e.kind)
            for e in analysis.graph.edges
        }
    )
    externals = sorted({(x.component, x.name) for x in analysis.graph.externals})
    return {
        "components": components,
        "edges": [{"src": s, "dst": d, "kind": k} for s, d, k in edges],
        "externals": [{"component": c, "name": n} for c, n in externals],
        "sccs": [list(node.members) for node in analysis.condensed.nodes],
        "scc_edges": [list(pair) for pair in sorted(analysis.condensed.edges)],
        "plan": analysis.plan.names,
        "plan_mode": analysis.plan.mode,
        "plan_seed": analysis.plan.seed,
        "warnings": [
            {"file": w.file_path, "message": w.message} for w in catalog.warnings
        ],
    }


def write_graph_export(config: RunConfig, analysis: AnalysisResult) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / GRAPH_FILE
    path.write_text(
        json.dumps(graph_export(analysis), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return path


# -- gateway / retriever construction ----------------------------------------------


def build_gateway(llm: LlmConfig | None, what: str) -> LlmGateway:
    """Construct a gateway, failing on anything that would fail later.

    The http backend reads its key per request; checking it here keeps a
    misconfigured run from dying halfway through.
    """
    if llm is None:
        raise ConfigurationError(f"{what} requires an llm section in the config")
    gateway = LlmGateway(llm)
    if llm.backend == "http" and not os.environ.get(llm.api_key_env, ""):
        raise ConfigurationError(f"api key env var {llm.api_key_env} is not set")
    return gateway


class FixtureRetriever:
    """Offline retriever over a JSON file mapping query text to a result."""

    def __init__(self, path: str | Path):
        try:
            self.entries = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigurationError(f"cannot read retriever fixture: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(
                f"retriever fixture is not valid JSON: {exc}"
            ) from exc
        if not isinstance(self.entries, dict):
            raise ConfigurationError("retriever fixture must be a JSON object")

    def retrieve(self, query: str) -> str:
        if query in self.entries:
            return str(self.entries[query])
        raise LookupError(query)


def build_retriever(config: RunConfig):
    if config.retriever is None or config.retriever.get("kind") == "null":
        return None
    return FixtureRetriever(config.retriever["path"])


# -- run execution ------------------------------------------------------------------


@dataclass
class RunResult:
    run_id: str
    run_dir: Path
    records: list[GenerationRecord]
    state: RunState


def latest_run_id(output_dir: str | Path) -> str:
    base = Path(output_dir)
    candidates = []
    if base.exists():
        for entry in base.iterdir():
            if entry.name.startswith("run-") and entry.name[4:].isdigit():
                candidates.append(entry.name)
    if not candidates:
        raise ResumeError(f"no run directories under {output_dir}")
    return max(candidates, key=lambda name: int(name[4:]))


def execute_run(
    config: RunConfig,
    resume: bool = False,
    console: EmitFn | None = None,
    run_id: str | None = None,
) -> RunResult:
    config.validate()
    gateway = build_gateway(config.llm, "generate")
    retriever = build_retriever(config)

    analysis = analyze(config)
    catalog = analysis.catalog
    graph_path = Path(config.output_dir) / GRAPH_FILE
    if not graph_path.exists():
        write_graph_export(config, analysis)

    if resume:
        run_id = latest_run_id(config.output_dir)
        run_dir = Path(config.output_dir) / run_id
        state = load_state(run_dir)
        check_resumable(state, config.repo_path)
        plan = ProcessingPlan(
            order=[catalog.by_name[n].id for n in state.plan_names],
            mode=state.plan_mode,
            seed=state.plan_seed,
        )
    else:
        run_id = run_id or new_run_id(config.output_dir)
        run_dir = ensure_run_dir(config.output_dir, run_id)
        plan = analysis.plan
        state = RunState(
            run_id=run_id,
            created_at=datetime.datetime.now().isoformat(timespec="seconds"),
            fingerprint=repo_fingerprint(config.repo_path),
            config=config_to_dict(config),
            plan_names=plan.names,
            plan_mode=plan.mode,
            plan_seed=plan.seed,
        )

    lock = RunLock(run_dir)
    lock.acquire()
    try:
        if resume:
            events = EventLog.continue_at(run_dir / EVENTS_FILE)
        else:
            save_state(run_dir, state)
            events = EventLog(run_dir / EVENTS_FILE)

        dest = Path(config.repo_path) if config.in_place else run_dir / PATCHED_DIR
        workspace = SourceWorkspace(config.repo_path, dest)
        if not resume and not config.in_place:
            workspace.export_tree()

        doc_store = dict(state.doc_store)
        seed_doc_store(catalog, doc_store)
        completed = set(state.statuses)

        def emit(kind: str, component: str | None, payload: dict) -> None:
            event = events.emit(kind, component, payload)
            if console is not None:
                console(event)

        def on_commit(record: GenerationRecord) -> None:
            name = record.component.qualified_name
            save_transcript(run_dir, record_to_dict(record))
            if (
                record.status in (STATUS_APPROVED, STATUS_LIMIT)
                and record.final_docstring
            ):
                workspace.apply(
                    catalog.get(name), record.final_docstring, overwrite_existing=True
                )
            state.statuses[name] = record.status
            state.doc_store = dict(doc_store)
            save_state(run_dir, state)

        records = run_pipeline(
            catalog,
            analysis.graph,
            plan,
            gateway,
            doc_store=doc_store,
            retriever=retriever,
            limits=config.limits,
            budget=config.budget,
            mode=config.mode,
            max_call_sites=config.reference_call_sites,
            overwrite_existing=config.overwrite_existing,
            completed=completed,
            emit=emit,
            on_commit=on_commit,
        )
        save_state(run_dir, state)
    finally:
        lock.release()

    return RunResult(run_id=run_id, run_dir=run_dir, records=records, state=state)


# -- evaluation ---------------------------------------------------------------------


def normalize_axes(raw: str) -> tuple[str, ...]:
    if raw.strip() == "all":
        return AXES
    axes = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        if part not in AXES:
            raise ConfigurationError(
                f"unknown axis {part!r}; choose from {', '.join(AXES)} or 'all'"
            )
        if part not in axes:
            axes.append(part)
    if not axes:
        raise ConfigurationError("no evaluation axes given")
    return tuple(axes)


@dataclass
class EvaluationResult:
    completeness: list[CompletenessReport]
    helpfulness: list[HelpfulnessReport]
    truthfulness: list[TruthfulnessReport]
    summary: EvaluationSummary

    def payload(self) -> dict:
        return report_payload(
            completeness=self.completeness or None,
            helpfulness=self.helpfulness or None,
            truthfulness=self.truthfulness or None,
            summary=self.summary,
        )


def evaluate_tree(
    catalog: ComponentCatalog,
    axes: tuple[str, ...],
    judge: LlmGateway | None = None,
) -> EvaluationResult:
    """Score every documented component in the catalog on the given axes.

    Helpfulness and truthfulness both consult the judge gateway
    (truthfulness for entity extraction), so they require one.
    """
    needs_judge = [a for a in axes if a in ("helpfulness", "truthfulness")]
    if needs_judge and judge is None:
        raise ConfigurationError(
            f"axes {', '.join(needs_judge)} require a judge_llm in the config"
        )

    completeness: list[CompletenessReport] = []
    helpfulness: list[HelpfulnessReport] = []
    truthfulness: list[TruthfulnessReport] = []
    for component in catalog.components:
        if not is_documented(component):
            continue
        doc = component.existing_docstring or ""
        if "completeness" in axes:
            completeness.append(completeness_score(component, doc))
        if "helpfulness" in axes:
            helpfulness.append(judge_helpfulness(component, doc, judge))
        if "truthfulness" in axes:
            truthfulness.append(
                evaluate_truthfulness(component, doc, catalog, judge)
            )

    summary = aggregate(
        catalog,
        completeness=completeness or None,
        helpfulness=helpfulness or None,
        truthfulness=truthfulness or None,
    )
    return EvaluationResult(completeness, helpfulness, truthfulness, summary)


def evaluation_target(path: str | Path) -> Path:
    """Resolve what tree to evaluate: a run dir's patched mirror or a repo."""
    base = Path(path)
    if (base / "state.json").exists():
        patched = base / PATCHED_DIR
        if patched.is_dir() and any(patched.rglob("*.py")):
            return patched
        state = load_state(base)
        return Path(state.config["repo_path"])
    return base


def write_reports(out_dir: str | Path, result: EvaluationResult) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = result.payload()
    json_path = out / "evaluation.json"
    json_path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    text_path = out / "evaluation.txt"
    text_path.write_text(payload["table"] + "\n", encoding="utf-8")
    return json_path, text_path
