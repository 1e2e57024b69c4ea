"""External knowledge retrievers.

Runs are hermetic by default: the null retriever answers every query with
a fixed notice. The fixture retriever serves canned answers from a JSON
file, keyed by exact query text, for tests and offline demos.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Protocol

from .context import DISABLED_EXTERNAL_TEXT
from .errors import ConfigurationError


class Retriever(Protocol):
    def retrieve(self, query: str) -> str: ...


class NullRetriever:
    def retrieve(self, query: str) -> str:
        return DISABLED_EXTERNAL_TEXT


class FixtureRetriever:
    """Exact-match lookup in a JSON object of query -> answer."""

    def __init__(self, path: str | Path) -> None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot load retrieval fixture: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("retrieval fixture must be a JSON object")
        self.entries: dict[str, str] = {str(k): str(v) for k, v in data.items()}

    def retrieve(self, query: str) -> str:
        if query not in self.entries:
            raise LookupError(query)
        return self.entries[query]


def build_retriever(config: dict | None) -> Retriever:
    if config is None:
        return NullRetriever()
    kind = config.get("kind", "null")
    if kind == "null":
        return NullRetriever()
    if kind == "fixture":
        path = config.get("path")
        if not path:
            raise ConfigurationError("fixture retriever requires a path")
        return FixtureRetriever(path)
    raise ConfigurationError(f"unknown retriever kind: {kind}")
