"""Static catalog of documentable components in a Python repository.

Parses every ``*.py`` file under a root directory with the stdlib ``ast``
module and records functions, methods, and classes together with the facts
the rest of the pipeline needs: signatures, return/raise behavior, existing
docstrings, and byte-exact source slices.
"""

from __future__ import annotations

import ast
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

# Directory names never scanned; hidden directories are skipped as well.
_SKIP_DIRS = {"__pycache__"}

# Scope boundaries: traversal helpers never descend into these.
_SCOPE_NODES = (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef, ast.Lambda)


@dataclass(frozen=True, order=True)
class ComponentId:
    """Stable identity of one component.

    line_span is 1-based and inclusive on both ends, covering the def/class
    statement through the end of its body (decorators excluded).
    """

    qualified_name: str
    file_path: str
    line_span: tuple[int, int]


@dataclass
class CodeComponent:
    """One documentable unit: a function, method, or class."""

    id: ComponentId
    kind: str  # "function" | "method" | "class"
    visibility: str  # "public" | "private"
    parameters: list[str]
    has_value_return: bool
    raises: list[str]
    existing_docstring: str | None
    source_text: str
    parent: ComponentId | None = None
    # Classes only: attribute names assigned at class scope or on self in
    # __init__, in first-seen order. Empty for functions and methods.
    class_attributes: list[str] = field(default_factory=list)

    @property
    def qualified_name(self) -> str:
        return self.id.qualified_name

    @property
    def file_path(self) -> str:
        return self.id.file_path


@dataclass(frozen=True)
class ParseWarning:
    file_path: str
    message: str


@dataclass
class ComponentCatalog:
    """All components of one repository plus per-file parse warnings."""

    root: Path
    components: list[CodeComponent]
    warnings: list[ParseWarning] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.by_name: dict[str, CodeComponent] = {
            c.qualified_name: c for c in self.components
        }

    def get(self, qualified_name: str) -> CodeComponent | None:
        return self.by_name.get(qualified_name)


@dataclass(frozen=True)
class CoverageReport:
    documentable: int
    documented: int
    coverage: float
    mean_words: float


def module_name_for(rel_path: str) -> str:
    """Dotted module path for a repository-relative file path.

    ``pkg/__init__.py`` maps to ``pkg``; a root-level ``__init__.py`` maps
    to the empty string.
    """
    parts = list(Path(rel_path).parts)
    parts[-1] = parts[-1][: -len(".py")]
    if parts[-1] == "__init__":
        parts.pop()
    return ".".join(parts)


def iter_source_files(root: Path) -> Iterator[Path]:
    """Yield Python files under root in deterministic (path-sorted) order."""
    for path in sorted(root.rglob("*.py")):
        rel = path.relative_to(root)
        if any(p in _SKIP_DIRS or p.startswith(".") for p in rel.parts):
            continue
        yield path


def parse_repository(root: str | Path) -> ComponentCatalog:
    """Build the component catalog for every parsable file under root.

    Unreadable or syntactically invalid files are skipped with a warning
    record; they never abort the scan.
    """
    root = Path(root)
    if not root.is_dir():
        raise ConfigurationError(f"repository path is not a directory: {root}")

    components: list[CodeComponent] = []
    warnings: list[ParseWarning] = []
    for path in iter_source_files(root):
        rel = path.relative_to(root).as_posix()
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            warnings.append(ParseWarning(rel, f"unreadable file: {exc}"))
            logger.warning("skipping %s: %s", rel, exc)
            continue
        try:
            tree = ast.parse(text)
        except SyntaxError as exc:
            warnings.append(
                ParseWarning(rel, f"syntax error at line {exc.lineno}: {exc.msg}")
            )
            logger.warning("skipping %s: syntax error at line %s", rel, exc.lineno)
            continue
        file_components = collect_file_components(rel, text, tree)
        _drop_shadowed(file_components, rel, warnings)
        components.extend(file_components)

    components.sort(key=lambda c: (c.file_path, c.id.line_span[0], c.qualified_name))
    return ComponentCatalog(root=root, components=components, warnings=warnings)


def collect_file_components(
    rel_path: str, text: str, tree: ast.Module
) -> list[CodeComponent]:
    """Extract the components defined in one parsed file."""
    lines = text.splitlines(keepends=True)
    module = module_name_for(rel_path)
    out: list[CodeComponent] = []
    _visit_body(tree.body, [module] if module else [], None, rel_path, lines, out)
    return out


def _visit_body(
    body: list[ast.stmt],
    name_parts: list[str],
    enclosing_class: ComponentId | None,
    rel_path: str,
    lines: list[str],
    out: list[CodeComponent],
) -> None:
    for node in body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            is_method = enclosing_class is not None
            comp = _make_function(
                node, name_parts, is_method, enclosing_class, rel_path, lines
            )
            out.append(comp)
            # Nested defs are ordinary functions in their own right.
            _visit_body(
                node.body, name_parts + [node.name], None, rel_path, lines, out
            )
        elif isinstance(node, ast.ClassDef):
            comp = _make_class(node, name_parts, rel_path, lines)
            out.append(comp)
            _visit_body(
                node.body, name_parts + [node.name], comp.id, rel_path, lines, out
            )


def _component_id(
    node: ast.FunctionDef | ast.AsyncFunctionDef | ast.ClassDef,
    name_parts: list[str],
    rel_path: str,
) -> ComponentId:
    qualified = ".".join(name_parts + [node.name])
    return ComponentId(
        qualified_name=qualified,
        file_path=rel_path,
        line_span=(node.lineno, node.end_lineno or node.lineno),
    )


def _source_slice(lines: list[str], span: tuple[int, int]) -> str:
    return "".join(lines[span[0] - 1 : span[1]])


def _visibility(name: str) -> str:
    return "private" if name.startswith("_") else "public"


def _make_function(
    node: ast.FunctionDef | ast.AsyncFunctionDef,
    name_parts: list[str],
    is_method: bool,
    enclosing_class: ComponentId | None,
    rel_path: str,
    lines: list[str],
) -> CodeComponent:
    cid = _component_id(node, name_parts, rel_path)
    return CodeComponent(
        id=cid,
        kind="method" if is_method else "function",
        visibility=_visibility(node.name),
        parameters=_parameter_names(node, drop_receiver=is_method),
        has_value_return=_has_value_return(node.body),
        raises=_raised_names(node.body),
        existing_docstring=ast.get_docstring(node),
        source_text=_source_slice(lines, cid.line_span),
        parent=enclosing_class if is_method else None,
    )


def _make_class(
    node: ast.ClassDef, name_parts: list[str], rel_path: str, lines: list[str]
) -> CodeComponent:
    cid = _component_id(node, name_parts, rel_path)
    init = next(
        (
            stmt
            for stmt in node.body
            if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef))
            and stmt.name == "__init__"
        ),
        None,
    )
    return CodeComponent(
        id=cid,
        kind="class",
        visibility=_visibility(node.name),
        parameters=_parameter_names(init, drop_receiver=True) if init else [],
        has_value_return=False,
        raises=_raised_names(init.body) if init else [],
        existing_docstring=ast.get_docstring(node),
        source_text=_source_slice(lines, cid.line_span),
        parent=None,
        class_attributes=_class_attributes(node, init),
    )


def _parameter_names(
    node: ast.FunctionDef | ast.AsyncFunctionDef, drop_receiver: bool
) -> list[str]:
    args = node.args
    positional = [a.arg for a in args.posonlyargs] + [a.arg for a in args.args]
    if drop_receiver and positional and positional[0] in ("self", "cls"):
        positional = positional[1:]
    names = positional
    if args.vararg:
        names.append(args.vararg.arg)
    names.extend(a.arg for a in args.kwonlyargs)
    if args.kwarg:
        names.append(args.kwarg.arg)
    return names


def iter_own_scope(body: list[ast.stmt]) -> Iterator[ast.AST]:
    """Walk statements of one scope without descending into nested scopes."""
    stack: list[ast.AST] = list(body)
    while stack:
        node = stack.pop()
        if isinstance(node, _SCOPE_NODES):
            continue
        yield node
        stack.extend(ast.iter_child_nodes(node))


def _has_value_return(body: list[ast.stmt]) -> bool:
    return any(
        isinstance(n, ast.Return) and n.value is not None
        for n in iter_own_scope(body)
    )


def _raised_names(body: list[ast.stmt]) -> list[str]:
    names: list[str] = []
    for node in iter_own_scope(body):
        if isinstance(node, ast.Raise) and node.exc is not None:
            name = _exception_name(node.exc)
            if name and name not in names:
                names.append(name)
    return names


def _exception_name(exc: ast.expr) -> str | None:
    target = exc.func if isinstance(exc, ast.Call) else exc
    return dotted_name(target)


def dotted_name(node: ast.expr) -> str | None:
    """Render a Name or Attribute chain as a dotted string, else None."""
    parts: list[str] = []
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
        return ".".join(reversed(parts))
    return None


def _class_attributes(
    node: ast.ClassDef, init: ast.FunctionDef | ast.AsyncFunctionDef | None
) -> list[str]:
    names: list[str] = []

    def add(name: str) -> None:
        if name not in names:
            names.append(name)

    for stmt in node.body:
        if isinstance(stmt, ast.Assign):
            for target in stmt.targets:
                if isinstance(target, ast.Name):
                    add(target.id)
        elif isinstance(stmt, ast.AnnAssign) and isinstance(stmt.target, ast.Name):
            add(stmt.target.id)
    if init is not None:
        for sub in iter_own_scope(init.body):
            targets: list[ast.expr] = []
            if isinstance(sub, ast.Assign):
                targets = sub.targets
            elif isinstance(sub, (ast.AnnAssign, ast.AugAssign)):
                targets = [sub.target]
            for target in targets:
                if (
                    isinstance(target, ast.Attribute)
                    and isinstance(target.value, ast.Name)
                    and target.value.id == "self"
                ):
                    add(target.attr)
    return names


def _drop_shadowed(
    components: list[CodeComponent], rel_path: str, warnings: list[ParseWarning]
) -> None:
    """Keep only the last definition for each qualified name in a file."""
    last_index: dict[str, int] = {}
    for i, comp in enumerate(components):
        last_index[comp.qualified_name] = i
    shadowed = [
        i
        for i, comp in enumerate(components)
        if last_index[comp.qualified_name] != i
    ]
    for i in reversed(shadowed):
        warnings.append(
            ParseWarning(
                rel_path,
                f"duplicate definition of {components[i].qualified_name}; "
                "keeping the last one",
            )
        )
        del components[i]


def is_documented(component: CodeComponent) -> bool:
    doc = component.existing_docstring
    return doc is not None and doc.strip() != ""


def coverage_report(catalog: ComponentCatalog) -> CoverageReport:
    """Docstring presence ratio plus mean word count of existing docstrings."""
    documentable = len(catalog.components)
    documented = [c for c in catalog.components if is_documented(c)]
    coverage = len(documented) / documentable if documentable else 0.0
    word_counts = [len(c.existing_docstring.split()) for c in documented]
    mean_words = sum(word_counts) / len(word_counts) if word_counts else 0.0
    return CoverageReport(
        documentable=documentable,
        documented=len(documented),
        coverage=coverage,
        mean_words=mean_words,
    )
