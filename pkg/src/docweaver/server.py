"""HTTP facade over runs: start pipelines, stream progress, evaluate on demand.

One pipeline thread per run; readers serve from the persisted run
directory, so the dashboard works identically against live and finished
runs. Evaluation results are cached by (component, axis, docstring hash)
and the cached body is returned verbatim on repeat calls.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from pathlib import Path
from typing import Iterator

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from .catalog import ComponentCatalog, parse_repository
from .completeness import completeness_score
from .config import RunConfig, parse_config
from .errors import ConfigurationError, DocweaverError, LockHeldError, ResumeError
from .judging import judge_helpfulness
from .llm import LlmGateway
from .reporting import (
    completeness_to_dict,
    helpfulness_to_dict,
    truthfulness_to_dict,
)
from .runner import AXES, build_gateway, execute_run
from .truthfulness import evaluate_truthfulness
from .workspace import (
    EVENTS_FILE,
    PATCHED_DIR,
    REPORTS_DIR,
    STATE_FILE,
    RunLock,
    load_state,
    new_run_id,
    read_events,
)

_POLL_SECONDS = 0.05


class RunRegistry:
    """Tracks output dirs, live pipeline threads, and evaluation caches."""

    def __init__(self, base_config: RunConfig | None = None):
        self.base_config = base_config
        self.output_dirs: list[str] = []
        self.threads: dict[str, threading.Thread] = {}
        self.errors: dict[str, str] = {}
        self.run_configs: dict[str, RunConfig] = {}
        self._eval_cache: dict[tuple[str, str, str], dict] = {}
        self._catalog_cache: dict[tuple[str, str], ComponentCatalog] = {}
        self._mutex = threading.Lock()
        if base_config is not None:
            self.add_output_dir(base_config.output_dir)

    def add_output_dir(self, path: str) -> None:
        with self._mutex:
            if path not in self.output_dirs:
                self.output_dirs.append(path)

    # -- run lookup ---------------------------------------------------------

    def run_dir(self, run_id: str) -> Path | None:
        for base in list(self.output_dirs):
            candidate = Path(base) / run_id
            if (candidate / STATE_FILE).exists():
                return candidate
        return None

    def list_runs(self) -> list[dict]:
        seen = {}
        for base in list(self.output_dirs):
            root = Path(base)
            if not root.is_dir():
                continue
            for entry in sorted(root.iterdir()):
                if not (entry / STATE_FILE).exists():
                    continue
                if entry.name in seen:
                    continue
                seen[entry.name] = self.run_summary(entry.name, entry)
        return list(seen.values())

    def is_active(self, run_id: str) -> bool:
        thread = self.threads.get(run_id)
        return thread is not None and thread.is_alive()

    def run_status(self, run_id: str, run_dir: Path) -> str:
        if self.is_active(run_id):
            return "running"
        if run_id in self.errors:
            return "failed"
        events = read_events(run_dir / EVENTS_FILE)
        if events and events[-1]["kind"] == "run_done":
            return "completed"
        return "interrupted"

    def run_summary(self, run_id: str, run_dir: Path) -> dict:
        state = load_state(run_dir)
        summary = {
            "run_id": run_id,
            "status": self.run_status(run_id, run_dir),
            "components": len(state.plan_names),
            "processed": len(state.statuses),
            "mode": state.config.get("mode"),
            "order": state.plan_mode,
        }
        if run_id in self.errors:
            summary["error"] = self.errors[run_id]
        return summary

    # -- starting runs ------------------------------------------------------

    def start_run(self, config: RunConfig) -> str:
        self.add_output_dir(config.output_dir)
        out_lock = RunLock(Path(config.output_dir))
        Path(config.output_dir).mkdir(parents=True, exist_ok=True)
        out_lock.acquire()  # LockHeldError -> 409 at the endpoint
        started = False
        try:
            run_id = new_run_id(config.output_dir)
            self.run_configs[run_id] = config

            def work() -> None:
                try:
                    execute_run(config, run_id=run_id)
                except Exception as exc:  # surfaced via run status
                    self.errors[run_id] = str(exc)
                finally:
                    out_lock.release()

            thread = threading.Thread(target=work, daemon=True)
            self.threads[run_id] = thread
            thread.start()
            started = True
        finally:
            if not started:
                out_lock.release()
        return run_id

    # -- evaluation ---------------------------------------------------------

    def catalog_for(self, run_id: str, run_dir: Path) -> ComponentCatalog:
        patched = run_dir / PATCHED_DIR
        state = load_state(run_dir)
        if patched.is_dir() and any(patched.rglob("*.py")):
            tree = patched
        else:
            tree = Path(state.config["repo_path"])
        key = (run_id, str(tree))
        # only reuse a parse for finished runs; live trees keep changing
        if key in self._catalog_cache and not self.is_active(run_id):
            return self._catalog_cache[key]
        catalog = parse_repository(tree)
        if not self.is_active(run_id):
            self._catalog_cache[key] = catalog
        return catalog

    def judge_for(self, run_id: str) -> LlmGateway | None:
        config = self.run_configs.get(run_id)
        if config is not None and config.judge_llm is not None:
            return build_gateway(config.judge_llm, "evaluation")
        run_dir = self.run_dir(run_id)
        if run_dir is not None:
            stored = load_state(run_dir).config.get("judge_llm")
            if stored:
                parsed = parse_config(
                    {"repo_path": ".", "judge_llm": stored}
                ).judge_llm
                return build_gateway(parsed, "evaluation")
        if self.base_config is not None and self.base_config.judge_llm is not None:
            return build_gateway(self.base_config.judge_llm, "evaluation")
        return None

    def evaluate_component(
        self, run_id: str, run_dir: Path, component_name: str, axis: str
    ) -> tuple[int, dict]:
        state = load_state(run_dir)
        docstring = state.doc_store.get(component_name)
        if not docstring:
            return 404, {
                "detail": f"{component_name} has no docstring in run {run_id}"
            }
        catalog = self.catalog_for(run_id, run_dir)
        component = catalog.get(component_name)
        if component is None:
            return 404, {"detail": f"unknown component: {component_name}"}

        digest = hashlib.sha256(docstring.encode("utf-8")).hexdigest()
        key = (component_name, axis, digest)
        with self._mutex:
            cached = self._eval_cache.get(key)
        if cached is not None:
            return 200, cached

        if axis == "completeness":
            body = completeness_to_dict(completeness_score(component, docstring))
        else:
            judge = self.judge_for(run_id)
            if judge is None:
                return 409, {
                    "detail": f"axis {axis} needs a judge_llm; none is configured"
                }
            if axis == "helpfulness":
                body = helpfulness_to_dict(
                    judge_helpfulness(component, docstring, judge)
                )
            else:
                body = truthfulness_to_dict(
                    evaluate_truthfulness(component, docstring, catalog, judge)
                )
        with self._mutex:
            self._eval_cache[key] = body
        return 200, body


def _sse_frame(event: dict) -> str:
    return f"event: {event['kind']}\ndata: {json.dumps(event, sort_keys=True)}\n\n"


def create_app(config: RunConfig | None = None) -> FastAPI:
    app = FastAPI(title="docweaver")
    # the dashboard is static files on another origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    registry = RunRegistry(config)
    app.state.registry = registry

    @app.exception_handler(DocweaverError)
    async def _domain_error(request: Request, exc: DocweaverError):
        status = 409 if isinstance(exc, (LockHeldError, ResumeError)) else 422
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.post("/runs", status_code=202)
    def start_run(body: dict):
        parsed = parse_config(body)
        if not Path(parsed.repo_path).is_dir():
            return JSONResponse(
                status_code=422,
                content={
                    "detail": f"repo_path is not a directory: {parsed.repo_path}",
                    "field": "repo_path",
                },
            )
        build_gateway(parsed.llm, "generate")  # fail before creating anything
        run_id = registry.start_run(parsed)
        return {"run_id": run_id}

    @app.get("/runs")
    def list_runs():
        return {"runs": registry.list_runs()}

    @app.get("/runs/{run_id}")
    def run_detail(run_id: str):
        run_dir = registry.run_dir(run_id)
        if run_dir is None:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown run: {run_id}"}
            )
        state = load_state(run_dir)
        summary = registry.run_summary(run_id, run_dir)
        summary["plan"] = state.plan_names
        summary["statuses"] = state.statuses
        return summary

    @app.get("/runs/{run_id}/components")
    def run_components(run_id: str):
        run_dir = registry.run_dir(run_id)
        if run_dir is None:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown run: {run_id}"}
            )
        state = load_state(run_dir)
        components = []
        for name in state.plan_names:
            components.append(
                {
                    "qualified_name": name,
                    "status": state.statuses.get(name),
                    "docstring": state.doc_store.get(name),
                }
            )
        return {"run_id": run_id, "components": components}

    @app.get("/runs/{run_id}/report")
    def run_report(run_id: str):
        run_dir = registry.run_dir(run_id)
        if run_dir is None:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown run: {run_id}"}
            )
        path = run_dir / REPORTS_DIR / "evaluation.json"
        if not path.exists():
            return JSONResponse(
                status_code=404,
                content={"detail": f"run {run_id} has no evaluation report"},
            )
        return json.loads(path.read_text(encoding="utf-8"))

    @app.get("/runs/{run_id}/events")
    def run_events(run_id: str, from_seq: int = Query(0, alias="from")):
        run_dir = registry.run_dir(run_id)
        if run_dir is None:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown run: {run_id}"}
            )
        events_path = run_dir / EVENTS_FILE

        def stream() -> Iterator[str]:
            next_seq = from_seq
            while True:
                pending = [
                    e for e in read_events(events_path) if e["seq"] >= next_seq
                ]
                for event in pending:
                    yield _sse_frame(event)
                    next_seq = event["seq"] + 1
                    if event["kind"] == "run_done":
                        return
                if not registry.is_active(run_id):
                    for event in read_events(events_path):
                        if event["seq"] >= next_seq:
                            yield _sse_frame(event)
                            next_seq = event["seq"] + 1
                    return
                time.sleep(_POLL_SECONDS)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.post("/components/{component_name}/evaluate")
    def evaluate_component(
        component_name: str,
        axis: str = Query("completeness"),
        run: str | None = Query(None),
    ):
        if axis not in AXES:
            return JSONResponse(
                status_code=422,
                content={
                    "detail": f"unknown axis {axis!r}; choose from {', '.join(AXES)}"
                },
            )
        if run is None:
            runs = registry.list_runs()
            if len(runs) != 1:
                return JSONResponse(
                    status_code=404,
                    content={
                        "detail": "pass ?run=<id>: "
                        f"{len(runs)} runs are available"
                    },
                )
            run = runs[0]["run_id"]
        run_dir = registry.run_dir(run)
        if run_dir is None:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown run: {run}"}
            )
        status, body = registry.evaluate_component(run, run_dir, component_name, axis)
        return JSONResponse(status_code=status, content=body)

    return app
