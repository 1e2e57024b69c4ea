"""Processing order for documentation generation.

Dependency-first scheduling: components a component depends on are planned
before it, so their fresh docstrings are available as context. Methods are
always planned before their enclosing class, in both topological and
random (ablation) modes.
"""

from __future__ import annotations

import heapq
import logging
import random
from dataclasses import dataclass

from .catalog import ComponentCatalog, ComponentId
from .errors import ConfigurationError, GraphInvariantError
from .graph import CondensedGraph

logger = logging.getLogger(__name__)

MODE_TOPOLOGICAL = "topological"
MODE_RANDOM = "random"


@dataclass
class ProcessingPlan:
    order: list[ComponentId]
    mode: str
    seed: int | None = None

    @property
    def names(self) -> list[str]:
        return [cid.qualified_name for cid in self.order]


def topological_plan(
    catalog: ComponentCatalog,
    cg: CondensedGraph,
    mode: str = MODE_TOPOLOGICAL,
    seed: int | None = None,
) -> ProcessingPlan:
    """Linearize the condensed graph into a processing order.

    Topological mode runs Kahn's algorithm with a lexicographic ready-set
    tie-break (smallest SCC representative first); an SCC's members are
    emitted together, sorted by qualified name. Scheduling additionally
    treats a class as waiting on its methods so the methods-first rule
    holds without reordering afterwards; when a graph makes both rules
    unsatisfiable at once (a method that depends on its own class), the
    methods-first rule wins and the broken edge is logged.

    Random mode shuffles all components with the given seed, then applies
    the same methods-before-class repair.
    """
    if mode == MODE_RANDOM:
        if seed is None:
            raise ConfigurationError("random order requires a seed")
        names = sorted(c.qualified_name for c in catalog.components)
        random.Random(seed).shuffle(names)
        names = _methods_first(names, catalog, warn=False)
        return ProcessingPlan(
            order=[catalog.by_name[n].id for n in names], mode=mode, seed=seed
        )
    if mode != MODE_TOPOLOGICAL:
        raise ConfigurationError(f"unknown plan mode: {mode}")

    names = _kahn_order(catalog, cg)
    names = _methods_first(names, catalog, warn=True)
    return ProcessingPlan(order=[catalog.by_name[n].id for n in names], mode=mode)


def _kahn_order(catalog: ComponentCatalog, cg: CondensedGraph) -> list[str]:
    members = {n.representative: list(n.members) for n in cg.nodes}
    reps = list(members)

    deps: dict[str, set[str]] = {r: set() for r in reps}
    real_deps: dict[str, set[str]] = {r: set() for r in reps}
    for src, dst in cg.edges:
        deps[src].add(dst)
        real_deps[src].add(dst)
    # Containment: a class's SCC waits until its methods' SCCs are emitted.
    for comp in catalog.components:
        if comp.kind != "method" or comp.parent is None:
            continue
        class_rep = cg.scc_of.get(comp.parent.qualified_name)
        method_rep = cg.scc_of.get(comp.qualified_name)
        if class_rep and method_rep and class_rep != method_rep:
            deps[class_rep].add(method_rep)

    dependents: dict[str, set[str]] = {r: set() for r in reps}
    for rep, targets in deps.items():
        for target in targets:
            dependents[target].add(rep)

    pending = {r: len(deps[r]) for r in reps}
    heap = [r for r in reps if pending[r] == 0]
    heapq.heapify(heap)
    done: set[str] = set()
    remaining = set(reps)
    order: list[str] = []

    while remaining:
        rep = None
        while heap:
            candidate = heapq.heappop(heap)
            if candidate not in done:
                rep = candidate
                break
        if rep is None:
            # Containment constraints stalled the queue. Fall back to real
            # dependencies only; this breaks methods-into-class cycles in
            # favor of the methods-first rule.
            fallback = sorted(
                r for r in remaining if real_deps[r] <= done
            )
            if not fallback:
                raise GraphInvariantError("cycle detected in condensed graph")
            rep = fallback[0]
            logger.warning(
                "plan: methods-first rule conflicts with dependencies around %s",
                rep,
            )
        done.add(rep)
        remaining.discard(rep)
        order.extend(members[rep])
        for dependent in dependents[rep]:
            if dependent in done:
                continue
            pending[dependent] -= 1
            if pending[dependent] == 0:
                heapq.heappush(heap, dependent)
    return order


def _methods_first(
    names: list[str], catalog: ComponentCatalog, warn: bool
) -> list[str]:
    """Stable repair pass: move each class to just after its last method."""
    methods_of: dict[str, list[str]] = {}
    for comp in catalog.components:
        if comp.kind == "method" and comp.parent is not None:
            methods_of.setdefault(comp.parent.qualified_name, []).append(
                comp.qualified_name
            )

    names = list(names)
    while True:
        pos = {name: i for i, name in enumerate(names)}
        moved = False
        for class_name in sorted(methods_of):
            if class_name not in pos:
                continue
            spots = [pos[m] for m in methods_of[class_name] if m in pos]
            if not spots:
                continue
            last = max(spots)
            if pos[class_name] < last:
                if warn:
                    logger.warning(
                        "plan: moving %s after its methods", class_name
                    )
                names.remove(class_name)
                names.insert(last, class_name)
                moved = True
                break
        if not moved:
            return names


def validate_plan(
    names: list[str], catalog: ComponentCatalog, cg: CondensedGraph
) -> list[str]:
    """Return a description of every ordering violation (empty if valid)."""
    problems: list[str] = []
    pos = {name: i for i, name in enumerate(names)}
    expected = {c.qualified_name for c in catalog.components}
    if set(names) != expected or len(names) != len(expected):
        problems.append("plan does not list every component exactly once")
        return problems

    members = {n.representative: n.members for n in cg.nodes}
    for src, dst in cg.edges:
        first_src = min(pos[m] for m in members[src])
        last_dst = max(pos[m] for m in members[dst])
        if last_dst >= first_src:
            problems.append(f"dependency order broken: {src} planned before {dst}")
    for comp in catalog.components:
        if comp.kind == "method" and comp.parent is not None:
            if pos[comp.qualified_name] > pos.get(
                comp.parent.qualified_name, len(names)
            ):
                problems.append(
                    f"method {comp.qualified_name} planned after its class"
                )
    return problems
