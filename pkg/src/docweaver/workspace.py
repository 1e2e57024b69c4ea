"""Run directory plumbing: docstring write-back, state, events, locking.

A run directory holds state.json, events.jsonl, transcripts/, patched/
(a mirror of the repo with docstrings inserted), reports/, and a lock
file. State is checkpointed atomically after every committed component,
so a killed run resumes exactly where it stopped.
"""

from __future__ import annotations

import ast
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import CodeComponent, iter_source_files, module_name_for
from .errors import (
    ComponentNotFoundError,
    LockHeldError,
    ResumeError,
    StaleSourceError,
)

STATE_FILE = "state.json"
EVENTS_FILE = "events.jsonl"
LOCK_FILE = "lock"
TRANSCRIPTS_DIR = "transcripts"
PATCHED_DIR = "patched"
REPORTS_DIR = "reports"


# -- docstring write-back -------------------------------------------------------


@dataclass(frozen=True)
class DocPatch:
    file_path: str
    component_name: str
    line: int  # 1-based line where the docstring block starts
    docstring: str


def _sanitize(text: str) -> str:
    """Escape text so it can sit verbatim inside a triple-quoted literal."""
    out = text.replace("\\", "\\\\").replace('"""', '\\"\\"\\"')
    if out.endswith('"'):
        # escape the final quote unless it is already escaped, or it
        # would merge with the closing triple quote
        i = len(out) - 2
        backslashes = 0
        while i >= 0 and out[i] == "\\":
            backslashes += 1
            i -= 1
        if backslashes % 2 == 0:
            out = out[:-1] + '\\"'
    return out


def render_docstring_block(docstring: str, indent: str) -> list[str]:
    raw = docstring.splitlines()
    # trailing blank lines would leave a whitespace-only line before the
    # closing quotes that survives docstring cleaning; drop them first so
    # the escape pass sees the real final character
    while raw and not raw[-1].strip():
        raw.pop()
    lines = _sanitize("\n".join(raw)).splitlines() or [""]
    if len(lines) == 1:
        return [f'{indent}"""{lines[0]}"""']
    out = [f'{indent}"""{lines[0]}']
    for line in lines[1:]:
        out.append(f"{indent}{line}" if line.strip() else "")
    out.append(f'{indent}"""')
    return out


def _locate(tree: ast.Module, rel_path: str, qualified_name: str):
    """Find the def/class for a qualified name by walking name segments.

    Lookup is by name, not by stored line numbers, so it stays correct
    after earlier patches shifted lines in the same file.
    """
    module = module_name_for(rel_path)
    if module:
        if not qualified_name.startswith(module + "."):
            return None
        local = qualified_name[len(module) + 1 :]
    else:
        local = qualified_name
    node = None
    body = tree.body
    for segment in local.split("."):
        matches = [
            n
            for n in body
            if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef))
            and n.name == segment
        ]
        if not matches:
            return None
        node = matches[-1]  # shadowed names keep the last definition
        body = node.body
    return node


def _strip_semicolon(text: str) -> str:
    text = text.strip()
    if text.startswith(";"):
        text = text[1:].strip()
    return text


def _has_docstring_stmt(node) -> bool:
    first = node.body[0]
    return (
        isinstance(first, ast.Expr)
        and isinstance(first.value, ast.Constant)
        and isinstance(first.value.value, str)
    )


def insert_docstring(
    source: str,
    component: CodeComponent,
    docstring: str,
    overwrite_existing: bool = False,
) -> tuple[str, DocPatch | None]:
    """Insert (or replace) the docstring of one component in source text.

    Returns the new text and a patch record, or (source, None) when
    nothing changed. All bytes outside the docstring block stay intact.
    """
    tree = ast.parse(source)
    node = _locate(tree, component.file_path, component.qualified_name)
    if node is None:
        raise ComponentNotFoundError(
            f"{component.qualified_name} not found in {component.file_path}"
        )
    lines = source.split("\n")
    first = node.body[0]
    body_line = lines[first.lineno - 1]
    inline_suite = body_line[: first.col_offset].strip() != ""
    has_doc = _has_docstring_stmt(node)

    if has_doc and not overwrite_existing:
        return source, None

    if inline_suite:
        # `def f(): pass` — hoist the suite onto its own line
        prefix = body_line[: first.col_offset]
        colon = prefix.rfind(":")
        header = body_line[: colon + 1]
        def_indent = body_line[: len(body_line) - len(body_line.lstrip())]
        indent = def_indent + "    "
        block = render_docstring_block(docstring, indent)
        if has_doc:
            remainder = _strip_semicolon(
                lines[first.end_lineno - 1][first.end_col_offset :]
            )
            tail = lines[first.end_lineno :]
        else:
            remainder = body_line[colon + 1 :].strip()
            tail = lines[first.lineno :]
        rest = [f"{indent}{remainder}"] if remainder else []
        new_lines = lines[: first.lineno - 1] + [header] + block + rest + tail
        new_source = "\n".join(new_lines)
        patch_line = first.lineno + 1
    else:
        indent = body_line[: len(body_line) - len(body_line.lstrip())]
        block = render_docstring_block(docstring, indent)
        if has_doc:
            end = first.end_lineno
            trailing = _strip_semicolon(lines[end - 1][first.end_col_offset :])
            if trailing:
                block = block + [f"{indent}{trailing}"]
            new_lines = lines[: first.lineno - 1] + block + lines[end:]
        else:
            new_lines = lines[: first.lineno - 1] + block + lines[first.lineno - 1 :]
        new_source = "\n".join(new_lines)
        patch_line = first.lineno

    if new_source == source:
        return source, None
    return new_source, DocPatch(
        file_path=component.file_path,
        component_name=component.qualified_name,
        line=patch_line,
        docstring=docstring,
    )


class SourceWorkspace:
    """Tracks pristine and patched text per file; writes the patched tree.

    The stale check always runs against the pristine repo bytes because
    component spans come from the original parse; in-file lookup for the
    patch itself is name-based and span-independent.
    """

    def __init__(self, repo_root: str | Path, dest_dir: str | Path | None = None):
        self.root = Path(repo_root)
        self.dest = Path(dest_dir) if dest_dir is not None else None
        self._pristine: dict[str, str] = {}
        self._current: dict[str, str] = {}
        self.patches: list[DocPatch] = []

    def _load(self, rel_path: str) -> None:
        if rel_path in self._pristine:
            return
        self._pristine[rel_path] = (self.root / rel_path).read_text(encoding="utf-8")
        current = self._pristine[rel_path]
        if self.dest is not None:
            patched = self.dest / rel_path
            if patched.exists() and patched.resolve() != (
                self.root / rel_path
            ).resolve():
                current = patched.read_text(encoding="utf-8")
        self._current[rel_path] = current

    def _check_fresh(self, component: CodeComponent) -> None:
        pristine = self._pristine[component.file_path]
        lines = pristine.splitlines(keepends=True)
        lo, hi = component.id.line_span
        actual = "".join(lines[lo - 1 : hi])
        if actual != component.source_text:
            raise StaleSourceError(
                f"{component.file_path} changed since analysis "
                f"({component.qualified_name} moved); run analyze again"
            )

    def apply(
        self,
        component: CodeComponent,
        docstring: str,
        overwrite_existing: bool = False,
    ) -> DocPatch | None:
        rel = component.file_path
        self._load(rel)
        self._check_fresh(component)
        new_text, patch = insert_docstring(
            self._current[rel], component, docstring, overwrite_existing
        )
        if patch is None:
            return None
        self._current[rel] = new_text
        self.patches.append(patch)
        if self.dest is not None:
            self.write_file(rel)
        return patch

    def current_text(self, rel_path: str) -> str:
        self._load(rel_path)
        return self._current[rel_path]

    def write_file(self, rel_path: str) -> None:
        assert self.dest is not None
        target = self.dest / rel_path
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self._current[rel_path], encoding="utf-8")

    def export_tree(self) -> None:
        """Mirror every source file into dest, patched or not."""
        assert self.dest is not None
        for path in iter_source_files(self.root):
            rel = path.relative_to(self.root).as_posix()
            self._load(rel)
            self.write_file(rel)


# -- run state -------------------------------------------------------------------


@dataclass
class RunState:
    run_id: str
    created_at: str
    fingerprint: str
    config: dict
    plan_names: list[str]
    plan_mode: str
    plan_seed: int | None
    statuses: dict[str, str] = field(default_factory=dict)
    doc_store: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "created_at": self.created_at,
            "fingerprint": self.fingerprint,
            "config": self.config,
            "plan_names": list(self.plan_names),
            "plan_mode": self.plan_mode,
            "plan_seed": self.plan_seed,
            "statuses": dict(self.statuses),
            "doc_store": dict(self.doc_store),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunState":
        return cls(
            run_id=data["run_id"],
            created_at=data["created_at"],
            fingerprint=data["fingerprint"],
            config=data["config"],
            plan_names=list(data["plan_names"]),
            plan_mode=data["plan_mode"],
            plan_seed=data["plan_seed"],
            statuses=dict(data["statuses"]),
            doc_store=dict(data["doc_store"]),
        )


def repo_fingerprint(root: str | Path) -> str:
    """Content hash over every source file; resume refuses on mismatch."""
    digest = hashlib.sha256()
    for path in iter_source_files(Path(root)):
        rel = path.relative_to(root).as_posix()
        digest.update(rel.encode("utf-8"))
        digest.update(b"\0")
        digest.update(path.read_bytes())
        digest.update(b"\0")
    return digest.hexdigest()


def save_state(run_dir: str | Path, state: RunState) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    run_dir = Path(run_dir)
    target = run_dir / STATE_FILE
    tmp = run_dir / (STATE_FILE + ".tmp")
    tmp.write_text(
        json.dumps(state.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    os.replace(tmp, target)


def load_state(run_dir: str | Path) -> RunState:
    path = Path(run_dir) / STATE_FILE
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        return RunState.from_dict(data)
    except FileNotFoundError as exc:
        raise ResumeError(f"no state file in {run_dir}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ResumeError(
            f"state file in {run_dir} is corrupt ({exc}); start a fresh run"
        ) from exc


def check_resumable(state: RunState, repo_root: str | Path) -> None:
    fingerprint = repo_fingerprint(repo_root)
    if fingerprint != state.fingerprint:
        raise ResumeError(
            "repository content changed since the run started; "
            "resume refused, start a fresh run"
        )


# -- run directory ----------------------------------------------------------------


def ensure_run_dir(output_dir: str | Path, run_id: str) -> Path:
    run_dir = Path(output_dir) / run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    for sub in (TRANSCRIPTS_DIR, PATCHED_DIR, REPORTS_DIR):
        (run_dir / sub).mkdir(exist_ok=True)
    return run_dir


def new_run_id(output_dir: str | Path) -> str:
    """Deterministic run names: run-0001, run-0002, ..."""
    base = Path(output_dir)
    taken = set()
    if base.exists():
        for entry in base.iterdir():
            name = entry.name
            if name.startswith("run-") and name[4:].isdigit():
                taken.add(int(name[4:]))
    n = 1
    while n in taken:
        n += 1
    return f"run-{n:04d}"


class RunLock:
    """Single writer per run directory via an O_EXCL lock file."""

    def __init__(self, run_dir: str | Path):
        self.path = Path(run_dir) / LOCK_FILE

    def acquire(self) -> None:
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise LockHeldError(
                f"run directory is locked by another process; "
                f"remove {self.path} if that process is gone"
            )
        os.write(fd, str(os.getpid()).encode("ascii"))
        os.close(fd)

    def release(self) -> None:
        try:
            self.path.unlink()
        except FileNotFoundError:
            pass

    def __enter__(self) -> "RunLock":
        self.acquire()
        return self

    def __exit__(self, *exc_info) -> None:
        self.release()


# -- event log --------------------------------------------------------------------


class EventLog:
    """Append-only JSONL event stream with monotonically increasing seq.

    Events carry no timestamps so two identical runs produce identical
    streams.
    """

    def __init__(self, path: str | Path, start_seq: int = 1):
        self.path = Path(path)
        self.seq = start_seq

    @classmethod
    def continue_at(cls, path: str | Path) -> "EventLog":
        events = read_events(path)
        last = events[-1]["seq"] if events else 0
        return cls(path, start_seq=last + 1)

    def emit(self, kind: str, component: str | None, payload: dict) -> dict:
        event = {
            "seq": self.seq,
            "kind": kind,
            "component": component,
            "payload": payload,
        }
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(event, sort_keys=True) + "\n")
        self.seq += 1
        return event


def read_events(path: str | Path, from_seq: int = 0) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    events = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            event = json.loads(line)
            if event["seq"] >= from_seq:
                events.append(event)
    return events


def transcript_path(run_dir: str | Path, qualified_name: str) -> Path:
    return Path(run_dir) / TRANSCRIPTS_DIR / f"{qualified_name}.json"


def save_transcript(run_dir: str | Path, record_dict: dict) -> Path:
    path = transcript_path(run_dir, record_dict["component"])
    path.write_text(
        json.dumps(record_dict, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path
