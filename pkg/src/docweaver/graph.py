"""Dependency extraction, SCC condensation, and graph queries.

Edges point from the dependent to its dependency: A -> B means A calls,
inherits from, accesses an attribute of, or imports B. Name resolution is
lexical and best-effort; anything unresolved produces no edge, and call,
base-class, and decorator targets that fail to resolve are logged as
external references.
"""

from __future__ import annotations

import ast
import builtins
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import (
    CodeComponent,
    ComponentCatalog,
    ComponentId,
    dotted_name,
    iter_own_scope,
    module_name_for,
)
from .errors import ComponentNotFoundError, GraphInvariantError

logger = logging.getLogger(__name__)

_BUILTIN_NAMES = frozenset(dir(builtins))
_SCOPE_NODES = (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef, ast.Lambda)

EDGE_KINDS = ("call", "inherit", "attribute", "import")


@dataclass(frozen=True)
class DependencyEdge:
    src: ComponentId
    dst: ComponentId
    kind: str


@dataclass(frozen=True)
class ExternalReference:
    """A call/base/decorator target that resolved to nothing in the catalog."""

    component: str
    name: str


@dataclass
class DependencyGraph:
    catalog: ComponentCatalog
    edges: list[DependencyEdge]
    externals: list[ExternalReference] = field(default_factory=list)
    # First line (1-based, absolute) where each caller invokes each callee.
    first_call_line: dict[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.out_edges: dict[str, list[str]] = {
            c.qualified_name: [] for c in self.catalog.components
        }
        self.in_edges: dict[str, list[str]] = {
            c.qualified_name: [] for c in self.catalog.components
        }
        for edge in self.edges:
            self.out_edges[edge.src.qualified_name].append(edge.dst.qualified_name)
            self.in_edges[edge.dst.qualified_name].append(edge.src.qualified_name)
        for adjacency in (self.out_edges, self.in_edges):
            for name, neighbors in adjacency.items():
                adjacency[name] = sorted(set(neighbors))


@dataclass(frozen=True)
class SccNode:
    """One strongly connected component; members sorted by qualified name."""

    members: tuple[str, ...]

    @property
    def representative(self) -> str:
        return self.members[0]


@dataclass
class CondensedGraph:
    nodes: list[SccNode]
    edges: list[tuple[str, str]]  # (from-representative, to-representative)
    scc_of: dict[str, str]  # member qualified name -> representative


@dataclass(frozen=True)
class CallSite:
    caller: ComponentId
    line: int
    snippet: str


@dataclass(frozen=True)
class EntityResolution:
    resolved: ComponentId | None
    ambiguous: bool


@dataclass
class _ModuleInfo:
    name: str
    file_path: str
    is_package: bool
    symbols: dict[str, str] = field(default_factory=dict)
    aliases: dict[str, str] = field(default_factory=dict)
    # Module-level assignment targets: known names, but never components.
    constants: set[str] = field(default_factory=set)


@dataclass
class _ClassContext:
    qualified_name: str
    module: str
    base_exprs: list[str] = field(default_factory=list)


def extract_dependencies(catalog: ComponentCatalog) -> DependencyGraph:
    """Scan every component's body and resolve its references.

    Re-reads the repository files recorded in the catalog; files that fail
    to parse on the second read are skipped the same way parse_repository
    skipped them.
    """
    builder = _GraphBuilder(catalog)
    builder.scan()
    return builder.finish()


class _GraphBuilder:
    def __init__(self, catalog: ComponentCatalog) -> None:
        self.catalog = catalog
        self.modules: dict[str, _ModuleInfo] = {}
        self.classes: dict[str, _ClassContext] = {}
        self._resolved_bases: dict[str, list[str]] = {}
        self.edge_set: set[tuple[str, str, str]] = set()
        self.external_set: set[tuple[str, str]] = set()
        self.call_lines: dict[tuple[str, str], int] = {}
        # (component, ast node, module, enclosing class qualified name)
        self.targets: dict[str, tuple[ast.AST, _ModuleInfo, str | None]] = {}

    # -- file pass -------------------------------------------------------

    def scan(self) -> None:
        file_paths = sorted({c.file_path for c in self.catalog.components})
        for rel in file_paths:
            path = Path(self.catalog.root) / rel
            try:
                tree = ast.parse(path.read_text(encoding="utf-8"))
            except (OSError, UnicodeDecodeError, SyntaxError) as exc:
                logger.warning("dependency scan skipping %s: %s", rel, exc)
                continue
            minfo = self._build_module_info(rel, tree)
            self.modules[minfo.name] = minfo
            self._index_components(tree.body, minfo, [], None)
        for qname, (node, minfo, class_q) in sorted(self.targets.items()):
            comp = self.catalog.get(qname)
            if comp is not None:
                self._scan_component(comp, node, minfo, class_q)

    def _build_module_info(self, rel: str, tree: ast.Module) -> _ModuleInfo:
        name = module_name_for(rel)
        minfo = _ModuleInfo(
            name=name,
            file_path=rel,
            is_package=Path(rel).name == "__init__.py",
        )
        for stmt in tree.body:
            if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
                qname = f"{name}.{stmt.name}" if name else stmt.name
                minfo.symbols[stmt.name] = qname
            elif isinstance(stmt, (ast.Import, ast.ImportFrom)):
                minfo.aliases.update(self._aliases_for(stmt, minfo))
            else:
                _collect_bindings(stmt, minfo.constants)
        return minfo

    def _aliases_for(
        self, stmt: ast.Import | ast.ImportFrom, minfo: _ModuleInfo
    ) -> dict[str, str]:
        aliases: dict[str, str] = {}
        if isinstance(stmt, ast.Import):
            for a in stmt.names:
                if a.asname:
                    aliases[a.asname] = a.name
                else:
                    head = a.name.split(".")[0]
                    aliases[head] = head
        else:
            base = self._import_from_base(stmt, minfo)
            for a in stmt.names:
                if a.name == "*":
                    continue
                target = f"{base}.{a.name}" if base else a.name
                aliases[a.asname or a.name] = target
        return aliases

    def _import_from_base(self, stmt: ast.ImportFrom, minfo: _ModuleInfo) -> str:
        if stmt.level == 0:
            return stmt.module or ""
        parts = minfo.name.split(".") if minfo.name else []
        if not minfo.is_package and parts:
            parts = parts[:-1]
        extra = stmt.level - 1
        parts = parts[: len(parts) - extra] if extra <= len(parts) else []
        if stmt.module:
            parts = parts + stmt.module.split(".")
        return ".".join(parts)

    def _index_components(
        self,
        body: list[ast.stmt],
        minfo: _ModuleInfo,
        name_parts: list[str],
        enclosing_class: str | None,
    ) -> None:
        prefix = name_parts or ([minfo.name] if minfo.name else [])
        for node in body:
            if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                qname = ".".join(prefix + [node.name])
                self.targets[qname] = (node, minfo, enclosing_class)
                self._index_components(node.body, minfo, prefix + [node.name], None)
            elif isinstance(node, ast.ClassDef):
                qname = ".".join(prefix + [node.name])
                self.targets[qname] = (node, minfo, None)
                self.classes[qname] = _ClassContext(
                    qualified_name=qname,
                    module=minfo.name,
                    base_exprs=[d for d in map(dotted_name, node.bases) if d],
                )
                self._index_components(node.body, minfo, prefix + [node.name], qname)

    # -- component pass ---------------------------------------------------

    def _scan_component(
        self,
        comp: CodeComponent,
        node: ast.AST,
        minfo: _ModuleInfo,
        class_q: str | None,
    ) -> None:
        is_class = isinstance(node, ast.ClassDef)
        body = list(node.body)

        local_aliases: dict[str, str] = {}
        local_bindings: set[str] = set()
        if not is_class:
            local_bindings.update(_all_parameter_names(node))
        for sub in iter_own_scope(body):
            if isinstance(sub, (ast.Import, ast.ImportFrom)):
                new = self._aliases_for(sub, minfo)
                local_aliases.update(new)
                for target in new.values():
                    hit = self._catalog_match(target)
                    if hit and hit != comp.qualified_name:
                        self.edge_set.add((comp.qualified_name, hit, "import"))
            else:
                _collect_bindings(sub, local_bindings)

        # Class-level statements resolve bare names against the class's own
        # members; methods resolve against their enclosing class.
        ctx = _ResolutionContext(
            minfo=minfo,
            class_q=comp.qualified_name if is_class else class_q,
            local_bindings=local_bindings,
            local_aliases=local_aliases,
        )

        if is_class:
            for base in node.bases:
                dotted = dotted_name(base)
                if dotted:
                    self._record_use(comp, dotted, "inherit", base.lineno, ctx)
                else:
                    self._scan_expressions(comp, [base], ctx)
        for deco in getattr(node, "decorator_list", []):
            target = deco.func if isinstance(deco, ast.Call) else deco
            dotted = dotted_name(target)
            if dotted:
                self._record_use(comp, dotted, "call", deco.lineno, ctx)
            if isinstance(deco, ast.Call):
                self._scan_expressions(comp, list(deco.args), ctx)
                self._scan_expressions(comp, [k.value for k in deco.keywords], ctx)
            elif not dotted:
                self._scan_expressions(comp, [deco], ctx)

        roots: list[ast.AST] = []
        if not is_class:
            args = node.args
            roots.extend(d for d in args.defaults)
            roots.extend(d for d in args.kw_defaults if d is not None)
        roots.extend(
            sub for sub in body if not isinstance(sub, (ast.Import, ast.ImportFrom))
        )
        self._scan_expressions(comp, roots, ctx)

    def _scan_expressions(
        self, comp: CodeComponent, roots: list[ast.AST], ctx: _ResolutionContext
    ) -> None:
        stack = list(roots)
        while stack:
            node = stack.pop()
            if isinstance(node, _SCOPE_NODES):
                continue
            if isinstance(node, (ast.Import, ast.ImportFrom)):
                continue  # handled in the binding pass
            if isinstance(node, ast.Call):
                dotted = dotted_name(node.func)
                if dotted:
                    self._record_use(comp, dotted, "call", node.lineno, ctx)
                else:
                    stack.append(node.func)
                stack.extend(node.args)
                stack.extend(k.value for k in node.keywords)
                continue
            if isinstance(node, ast.Attribute) and isinstance(node.ctx, ast.Load):
                dotted = dotted_name(node)
                if dotted:
                    self._record_use(comp, dotted, "attribute", node.lineno, ctx)
                    continue
            stack.extend(ast.iter_child_nodes(node))

    def _record_use(
        self,
        comp: CodeComponent,
        dotted: str,
        kind: str,
        lineno: int,
        ctx: _ResolutionContext,
    ) -> None:
        resolved, suppress = self._resolve(dotted.split("."), ctx)
        if resolved is not None:
            if resolved != comp.qualified_name:
                self.edge_set.add((comp.qualified_name, resolved, kind))
                if kind == "call":
                    key = (comp.qualified_name, resolved)
                    if key not in self.call_lines or lineno < self.call_lines[key]:
                        self.call_lines[key] = lineno
            return
        # Attribute reads that miss the catalog are too noisy to report.
        if kind == "attribute" or suppress:
            return
        expanded = self._expand(dotted, ctx)
        self.external_set.add((comp.qualified_name, expanded))

    # -- resolution --------------------------------------------------------

    def _catalog_match(self, dotted: str) -> str | None:
        parts = dotted.split(".")
        for end in range(len(parts), 0, -1):
            candidate = ".".join(parts[:end])
            if candidate in self.catalog.by_name:
                return candidate
        return None

    def _expand(self, dotted: str, ctx: _ResolutionContext) -> str:
        """Rewrite the head of a dotted name through import aliases."""
        parts = dotted.split(".")
        head, rest = parts[0], parts[1:]
        target = ctx.local_aliases.get(head) or ctx.minfo.aliases.get(head)
        if target:
            return ".".join([target] + rest)
        return dotted

    def _resolve(
        self, parts: list[str], ctx: _ResolutionContext
    ) -> tuple[str | None, bool]:
        """Resolve a dotted name to a catalog member.

        Returns (qualified_name or None, suppress_external_log). Resolution
        order: local import aliases, local bindings (method receivers get
        class-member lookup), enclosing class members, module-level symbols,
        module import aliases, absolute names.
        """
        head, rest = parts[0], parts[1:]
        if head in ctx.local_aliases:
            return self._catalog_match(
                ".".join([ctx.local_aliases[head]] + rest)
            ), False
        if ctx.class_q and head in ("self", "cls"):
            if not rest:
                return None, True
            member = self._class_member(ctx.class_q, rest[0])
            if member is None:
                return None, True
            return self._catalog_match(".".join([member] + rest[1:])), True
        if head in ctx.local_bindings:
            return None, True
        if ctx.class_q:
            member = self._class_member(ctx.class_q, head)
            if member is not None:
                return self._catalog_match(".".join([member] + rest)), False
        if head in ctx.minfo.symbols:
            return self._catalog_match(
                ".".join([ctx.minfo.symbols[head]] + rest)
            ), False
        if head in ctx.minfo.constants:
            return None, True
        if head in ctx.minfo.aliases:
            return self._catalog_match(
                ".".join([ctx.minfo.aliases[head]] + rest)
            ), False
        hit = self._catalog_match(".".join(parts))
        if hit:
            return hit, False
        return None, head in _BUILTIN_NAMES

    def _class_member(
        self, class_q: str, name: str, _visited: set[str] | None = None
    ) -> str | None:
        visited = _visited or set()
        if class_q in visited:
            return None
        visited.add(class_q)
        candidate = f"{class_q}.{name}"
        if candidate in self.catalog.by_name:
            return candidate
        for base in self._bases_of(class_q):
            found = self._class_member(base, name, visited)
            if found is not None:
                return found
        return None

    def _bases_of(self, class_q: str) -> list[str]:
        if class_q in self._resolved_bases:
            return self._resolved_bases[class_q]
        self._resolved_bases[class_q] = []  # break cycles during resolution
        cctx = self.classes.get(class_q)
        resolved: list[str] = []
        if cctx is not None:
            minfo = self.modules.get(cctx.module)
            enclosing = class_q.rsplit(".", 1)[0] if "." in class_q else None
            if enclosing not in self.classes:
                enclosing = None
            if minfo is not None:
                ctx = _ResolutionContext(
                    minfo=minfo,
                    class_q=enclosing,
                    local_bindings=set(),
                    local_aliases={},
                )
                for dotted in cctx.base_exprs:
                    hit, _ = self._resolve(dotted.split("."), ctx)
                    if hit is not None and self.catalog.get(hit) is not None:
                        if self.catalog.by_name[hit].kind == "class":
                            resolved.append(hit)
        self._resolved_bases[class_q] = resolved
        return resolved

    # -- output ------------------------------------------------------------

    def finish(self) -> DependencyGraph:
        by_name = self.catalog.by_name
        edges = [
            DependencyEdge(src=by_name[s].id, dst=by_name[d].id, kind=k)
            for (s, d, k) in sorted(self.edge_set)
            if s != d and s in by_name and d in by_name
        ]
        externals = [
            ExternalReference(component=c, name=n)
            for (c, n) in sorted(self.external_set)
        ]
        return DependencyGraph(
            catalog=self.catalog,
            edges=edges,
            externals=externals,
            first_call_line=dict(self.call_lines),
        )


@dataclass
class _ResolutionContext:
    minfo: _ModuleInfo
    class_q: str | None
    local_bindings: set[str]
    local_aliases: dict[str, str]


def _all_parameter_names(node: ast.AST) -> list[str]:
    args = node.args
    names = [a.arg for a in args.posonlyargs + args.args + args.kwonlyargs]
    if args.vararg:
        names.append(args.vararg.arg)
    if args.kwarg:
        names.append(args.kwarg.arg)
    return names


def _collect_bindings(node: ast.AST, bindings: set[str]) -> None:
    targets: list[ast.expr] = []
    if isinstance(node, ast.Assign):
        targets = node.targets
    elif isinstance(node, (ast.AnnAssign, ast.AugAssign)):
        targets = [node.target]
    elif isinstance(node, (ast.For, ast.AsyncFor)):
        targets = [node.target]
    elif isinstance(node, (ast.With, ast.AsyncWith)):
        targets = [i.optional_vars for i in node.items if i.optional_vars]
    elif isinstance(node, ast.NamedExpr):
        targets = [node.target]
    elif isinstance(node, ast.ExceptHandler) and node.name:
        bindings.add(node.name)
    elif isinstance(node, ast.comprehension):
        targets = [node.target]
    for target in targets:
        _add_target_names(target, bindings)


def _add_target_names(target: ast.expr, bindings: set[str]) -> None:
    if isinstance(target, ast.Name):
        bindings.add(target.id)
    elif isinstance(target, (ast.Tuple, ast.List)):
        for element in target.elts:
            _add_target_names(element, bindings)
    elif isinstance(target, ast.Starred):
        _add_target_names(target.value, bindings)


# -- condensation ------------------------------------------------------------


def condense_sccs(graph: DependencyGraph) -> CondensedGraph:
    """Collapse strongly connected components via Tarjan's algorithm.

    Iterative formulation; recursion depth is independent of graph size.
    The result is acyclic by construction and verified before returning.
    """
    order = [c.qualified_name for c in graph.catalog.components]
    adjacency = graph.out_edges

    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = 0
    member_groups: list[list[str]] = []

    for root in order:
        if root in index:
            continue
        work: list[tuple[str, int]] = [(root, 0)]
        while work:
            node, child_i = work[-1]
            if child_i == 0:
                index[node] = lowlink[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            neighbors = adjacency.get(node, [])
            while child_i < len(neighbors):
                nxt = neighbors[child_i]
                child_i += 1
                if nxt not in index:
                    work[-1] = (node, child_i)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if nxt in on_stack:
                    lowlink[node] = min(lowlink[node], index[nxt])
            if advanced:
                continue
            work[-1] = (node, child_i)
            if lowlink[node] == index[node]:
                group: list[str] = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    group.append(member)
                    if member == node:
                        break
                member_groups.append(sorted(group))
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])

    nodes = sorted(
        (SccNode(members=tuple(g)) for g in member_groups),
        key=lambda n: n.representative,
    )
    scc_of = {m: n.representative for n in nodes for m in n.members}
    condensed_edges = sorted(
        {
            (scc_of[e.src.qualified_name], scc_of[e.dst.qualified_name])
            for e in graph.edges
            if scc_of[e.src.qualified_name] != scc_of[e.dst.qualified_name]
        }
    )
    condensed = CondensedGraph(nodes=nodes, edges=condensed_edges, scc_of=scc_of)
    _verify_acyclic(condensed)
    return condensed


def _verify_acyclic(cg: CondensedGraph) -> None:
    pending = {n.representative: 0 for n in cg.nodes}
    dependents: dict[str, list[str]] = {n.representative: [] for n in cg.nodes}
    for src, dst in cg.edges:
        pending[src] += 1
        dependents[dst].append(src)
    ready = [r for r, n in pending.items() if n == 0]
    seen = 0
    while ready:
        rep = ready.pop()
        seen += 1
        for dep in dependents[rep]:
            pending[dep] -= 1
            if pending[dep] == 0:
                ready.append(dep)
    if seen != len(cg.nodes):
        raise GraphInvariantError("cycle detected in condensed graph")


# -- queries -----------------------------------------------------------------


def call_sites(
    target: str, catalog: ComponentCatalog, graph: DependencyGraph
) -> list[CallSite]:
    """Call sites of target, ordered by caller qualified name.

    Each caller contributes its first call line, shown with two lines of
    surrounding context (clamped to the caller's own source).
    """
    if catalog.get(target) is None:
        raise ComponentNotFoundError(target)
    sites: list[CallSite] = []
    callers = sorted(
        {
            e.src.qualified_name
            for e in graph.edges
            if e.dst.qualified_name == target and e.kind == "call"
        }
    )
    for caller_name in callers:
        caller = catalog.by_name[caller_name]
        line = graph.first_call_line.get((caller_name, target))
        if line is None:
            continue
        lines = caller.source_text.splitlines()
        offset = line - caller.id.line_span[0]
        lo = max(0, offset - 2)
        hi = min(len(lines), offset + 3)
        snippet = "\n".join(lines[lo:hi])
        sites.append(CallSite(caller=caller.id, line=line, snippet=snippet))
    return sites


def one_hop_dependencies(
    source: str, catalog: ComponentCatalog, graph: DependencyGraph
) -> list[ComponentId]:
    """Distinct direct dependencies of source, sorted by qualified name."""
    if catalog.get(source) is None:
        raise ComponentNotFoundError(source)
    return [catalog.by_name[q].id for q in graph.out_edges.get(source, [])]


def resolve_entity(mention: str, catalog: ComponentCatalog) -> EntityResolution:
    """Match a docstring mention against the catalog.

    Tiers: exact qualified name, then unique final segment, then unique
    trailing Class.method pair. Two or more candidates at the first
    matching tier mean the mention is ambiguous.
    """
    if mention in catalog.by_name:
        return EntityResolution(resolved=catalog.by_name[mention].id, ambiguous=False)
    finals = [
        c for c in catalog.components if c.qualified_name.split(".")[-1] == mention
    ]
    if len(finals) == 1:
        return EntityResolution(resolved=finals[0].id, ambiguous=False)
    if len(finals) > 1:
        return EntityResolution(resolved=None, ambiguous=True)
    if "." in mention:
        tail = [
            c
            for c in catalog.components
            if c.qualified_name.count(".") >= 1
            and ".".join(c.qualified_name.split(".")[-2:]) == mention
        ]
        if len(tail) == 1:
            return EntityResolution(resolved=tail[0].id, ambiguous=False)
        if len(tail) > 1:
            return EntityResolution(resolved=None, ambiguous=True)
    return EntityResolution(resolved=None, ambiguous=False)
