"""Graph snapshot serialization.

One JSON document captures the catalog, edges, SCCs, and plan so the
evaluation side and the dashboard can work from a file instead of
re-running analysis.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .catalog import CodeComponent, ComponentCatalog, ComponentId
from .errors import ConfigurationError
from .graph import CondensedGraph, DependencyEdge, DependencyGraph, SccNode
from .planning import ProcessingPlan


def component_to_dict(comp: CodeComponent) -> dict[str, Any]:
    return {
        "qualified_name": comp.qualified_name,
        "file_path": comp.file_path,
        "line_span": list(comp.id.line_span),
        "kind": comp.kind,
        "visibility": comp.visibility,
        "parameters": list(comp.parameters),
        "has_value_return": comp.has_value_return,
        "raises": list(comp.raises),
        "existing_docstring": comp.existing_docstring,
        "source_text": comp.source_text,
        "parent": comp.parent.qualified_name if comp.parent else None,
        "class_attributes": list(comp.class_attributes),
    }


def graph_export(
    catalog: ComponentCatalog,
    graph: DependencyGraph,
    cg: CondensedGraph,
    plan: ProcessingPlan,
) -> dict[str, Any]:
    return {
        "components": [component_to_dict(c) for c in catalog.components],
        "edges": [
            {
                "from": e.src.qualified_name,
                "to": e.dst.qualified_name,
                "kind": e.kind,
            }
            for e in graph.edges
        ],
        "externals": [
            {"component": x.component, "name": x.name} for x in graph.externals
        ],
        "sccs": [{"members": list(n.members)} for n in cg.nodes],
        "plan": plan.names,
        "plan_mode": plan.mode,
        "plan_seed": plan.seed,
        "warnings": [
            {"file_path": w.file_path, "message": w.message}
            for w in catalog.warnings
        ],
    }


def write_graph_export(
    path: str | Path,
    catalog: ComponentCatalog,
    graph: DependencyGraph,
    cg: CondensedGraph,
    plan: ProcessingPlan,
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = graph_export(catalog, graph, cg, plan)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_graph_export(
    path: str | Path,
) -> tuple[ComponentCatalog, DependencyGraph, CondensedGraph, ProcessingPlan]:
    """Rebuild analysis objects from a snapshot file.

    Call-site line data is not part of the snapshot, so reference lookups
    on a loaded graph return no snippets.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read graph export {path}: {exc}") from exc

    components = []
    for raw in data["components"]:
        cid = ComponentId(
            qualified_name=raw["qualified_name"],
            file_path=raw["file_path"],
            line_span=tuple(raw["line_span"]),
        )
        components.append(
            CodeComponent(
                id=cid,
                kind=raw["kind"],
                visibility=raw["visibility"],
                parameters=list(raw["parameters"]),
                has_value_return=raw["has_value_return"],
                raises=list(raw["raises"]),
                existing_docstring=raw["existing_docstring"],
                source_text=raw["source_text"],
                parent=None,
                class_attributes=list(raw.get("class_attributes", [])),
            )
        )
    by_name = {c.qualified_name: c for c in components}
    for raw, comp in zip(data["components"], components):
        if raw["parent"] and raw["parent"] in by_name:
            comp.parent = by_name[raw["parent"]].id

    catalog = ComponentCatalog(root=path.parent, components=components)
    edges = [
        DependencyEdge(
            src=by_name[e["from"]].id, dst=by_name[e["to"]].id, kind=e["kind"]
        )
        for e in data["edges"]
        if e["from"] in by_name and e["to"] in by_name
    ]
    graph = DependencyGraph(catalog=catalog, edges=edges)
    nodes = [SccNode(members=tuple(s["members"])) for s in data["sccs"]]
    cg = CondensedGraph(
        nodes=nodes,
        edges=[],
        scc_of={m: n.representative for n in nodes for m in n.members},
    )
    plan = ProcessingPlan(
        order=[by_name[n].id for n in data["plan"] if n in by_name],
        mode=data.get("plan_mode", "topological"),
        seed=data.get("plan_seed"),
    )
    return catalog, graph, cg, plan
