"""Command-line entry point.

Subcommands: analyze, plan, generate, evaluate, report, coverage, serve.
All output that matters for scripting goes to stdout; errors go to stderr
with exit code 1 (argparse usage errors keep their usual code 2).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .agents import MODE_AGENT, MODE_CHAT
from .catalog import coverage_report, parse_repository
from .config import ORDER_RANDOM, ORDER_TOPOLOGICAL, RunConfig, load_config
from .errors import ConfigurationError, DocweaverError
from .runner import (
    analyze,
    build_gateway,
    evaluate_tree,
    evaluation_target,
    execute_run,
    normalize_axes,
    write_graph_export,
    write_reports,
)
from .workspace import REPORTS_DIR

_MODE_FLAGS = {"agent": MODE_AGENT, "chat": MODE_CHAT}
_ORDER_FLAGS = {
    "topo": ORDER_TOPOLOGICAL,
    "topological": ORDER_TOPOLOGICAL,
    "random": ORDER_RANDOM,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docweaver",
        description="Generate and evaluate docstrings for a Python repository.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p, required=True):
        p.add_argument("--config", required=required, help="path to run config JSON")

    p = sub.add_parser("analyze", help="parse the repo and export its graph")
    add_config(p)
    p.add_argument("--out", help="override output_dir for the export")

    p = sub.add_parser("plan", help="print the processing order")
    add_config(p)
    p.add_argument("--order", choices=sorted(_ORDER_FLAGS), help="override order")
    p.add_argument("--seed", type=int, help="seed for --order random")

    p = sub.add_parser("generate", help="run the documentation pipeline")
    add_config(p)
    p.add_argument("--mode", choices=sorted(_MODE_FLAGS), help="override mode")
    p.add_argument("--order", choices=sorted(_ORDER_FLAGS), help="override order")
    p.add_argument("--seed", type=int, help="seed for --order random")
    p.add_argument("--resume", action="store_true", help="continue the latest run")
    p.add_argument(
        "--overwrite",
        action="store_true",
        help="regenerate docstrings for already-documented components",
    )
    p.add_argument("--out", help="override output_dir")

    p = sub.add_parser("evaluate", help="score docstrings in a run dir or repo")
    p.add_argument("target", help="run directory or repository path")
    add_config(p, required=False)
    p.add_argument(
        "--axes",
        default="completeness",
        help="comma-separated: completeness,helpfulness,truthfulness or 'all'",
    )
    p.add_argument("--out", help="report directory (repo targets only)")

    p = sub.add_parser("report", help="print the table from a saved evaluation")
    p.add_argument("target", help="run directory or report directory")

    p = sub.add_parser("coverage", help="docstring coverage statistics")
    p.add_argument("repo", nargs="?", help="repository path")
    add_config(p, required=False)

    p = sub.add_parser("serve", help="start the HTTP server")
    add_config(p, required=False)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)

    return parser


def _load(args, overrides: dict | None = None) -> RunConfig:
    config = load_config(args.config)
    for name, value in (overrides or {}).items():
        if value is not None:
            setattr(config, name, value)
    config.validate()
    return config


def _generate_overrides(args) -> dict:
    out: dict = {}
    if getattr(args, "mode", None):
        out["mode"] = _MODE_FLAGS[args.mode]
    if getattr(args, "order", None):
        out["order"] = _ORDER_FLAGS[args.order]
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if getattr(args, "out", None):
        out["output_dir"] = args.out
    if getattr(args, "overwrite", False):
        out["overwrite_existing"] = True
    return out


def cmd_analyze(args) -> int:
    config = _load(args, {"output_dir": getattr(args, "out", None)})
    analysis = analyze(config)
    path = write_graph_export(config, analysis)
    catalog = analysis.catalog
    cycles = sum(1 for node in analysis.condensed.nodes if len(node.members) > 1)
    print(f"components: {len(catalog.components)}")
    print(f"edges: {len(analysis.graph.edges)}")
    print(f"sccs: {len(analysis.condensed.nodes)} ({cycles} with cycles)")
    print(f"graph export: {path}")
    for warning in catalog.warnings:
        print(f"warning: {warning.file_path}: {warning.message}", file=sys.stderr)
    return 0


def cmd_plan(args) -> int:
    config = _load(args, _generate_overrides(args))
    analysis = analyze(config)
    for position, name in enumerate(analysis.plan.names, start=1):
        print(f"{position:4d}  {name}")
    return 0


def cmd_generate(args) -> int:
    config = _load(args, _generate_overrides(args))

    def console(event: dict) -> None:
        kind = event["kind"]
        if kind == "component_started":
            print(f"-> {event['component']}")
        elif kind == "component_done":
            payload = event["payload"]
            status = payload.get("status", "?")
            print(f"   {event['component']}: {status}")
        elif kind == "warning":
            print(f"   warning: {event['payload'].get('message', '')}")
        elif kind == "run_done":
            payload = event["payload"]
            print(
                f"done: {payload.get('components', 0)} components, "
                f"{payload.get('approved', 0)} approved"
            )

    result = execute_run(config, resume=args.resume, console=console)
    print(f"run directory: {result.run_dir}")
    return 0


def cmd_evaluate(args) -> int:
    axes = normalize_axes(args.axes)
    judge = None
    config = None
    if args.config:
        config = _load(args)
    judged_axes = [a for a in axes if a in ("helpfulness", "truthfulness")]
    if judged_axes:
        if config is None or config.judge_llm is None:
            raise ConfigurationError(
                f"axes {', '.join(judged_axes)} need a judge: pass --config "
                "with a judge_llm section"
            )
        judge = build_gateway(config.judge_llm, "evaluation")

    target = Path(args.target)
    if not target.exists():
        print(f"error: no such path: {target}", file=sys.stderr)
        return 1
    tree = evaluation_target(target)
    catalog = parse_repository(tree)
    result = evaluate_tree(catalog, axes, judge)

    if (target / "state.json").exists():
        out_dir = target / REPORTS_DIR
    else:
        out_dir = Path(args.out) if args.out else Path("reports")
    json_path, _ = write_reports(out_dir, result)
    print(result.payload()["table"])
    print(f"report: {json_path}")
    return 0


def cmd_report(args) -> int:
    base = Path(args.target)
    candidates = [
        base if base.is_file() else None,
        base / REPORTS_DIR / "evaluation.json",
        base / "evaluation.json",
    ]
    candidates = [c for c in candidates if c is not None]
    for path in candidates:
        if path.exists():
            payload = json.loads(path.read_text(encoding="utf-8"))
            table = payload.get("table")
            if table is None:
                print("error: report has no table section", file=sys.stderr)
                return 1
            print(table)
            return 0
    print(f"error: no evaluation report under {base}", file=sys.stderr)
    return 1


def cmd_coverage(args) -> int:
    if args.repo:
        repo = Path(args.repo)
    elif args.config:
        repo = Path(_load(args).repo_path)
    else:
        print("error: coverage needs a repo path or --config", file=sys.stderr)
        return 1
    if not repo.is_dir():
        print(f"error: not a directory: {repo}", file=sys.stderr)
        return 1
    catalog = parse_repository(repo)
    report = coverage_report(catalog)
    print(f"documentable components: {report.documentable}")
    print(f"documented: {report.documented}")
    print(f"coverage: {report.coverage:.3f}")
    print(f"mean words per docstring: {report.mean_words:.1f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    config = _load(args) if args.config else None
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "analyze": cmd_analyze,
    "plan": cmd_plan,
    "generate": cmd_generate,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
    "coverage": cmd_coverage,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DocweaverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
