"""LLM gateway: one entry point, two backends.

The http backend speaks the chat-completions JSON shape over POST with
bearer auth and exponential backoff on transient failures. The scripted
backend replays canned replies from a JSON script and is a pure function
of the script and the message history, which keeps runs hermetic and
byte-reproducible.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import requests

from .context import estimate_tokens
from .errors import ConfigurationError, GatewayError, ScriptError

logger = logging.getLogger(__name__)

BACKEND_HTTP = "http"
BACKEND_SCRIPTED = "scripted"

_BACKOFF_BASE_SECONDS = 0.5
DEFAULT_MAX_IN_FLIGHT = 4


@dataclass
class LlmConfig:
    backend: str = BACKEND_SCRIPTED
    base_url: str | None = None
    model: str | None = None
    api_key_env: str = "LLM_API_KEY"
    timeout: float = 30.0
    max_retries: int = 2
    temperature: float = 0.0
    script_path: str | None = None
    max_in_flight: int = DEFAULT_MAX_IN_FLIGHT

    def validate(self) -> None:
        if self.backend == BACKEND_HTTP:
            if not self.base_url or not self.model:
                raise ConfigurationError(
                    "http backend requires base_url and model"
                )
        elif self.backend == BACKEND_SCRIPTED:
            if not self.script_path:
                raise ConfigurationError("scripted backend requires script_path")
        else:
            raise ConfigurationError(f"unknown llm backend: {self.backend}")
        if self.max_retries < 0:
            raise ConfigurationError("max_retries must be >= 0")
        if self.max_in_flight < 1:
            raise ConfigurationError("max_in_flight must be >= 1")


@dataclass(frozen=True)
class ChatUsage:
    prompt_tokens: int
    completion_tokens: int


@dataclass
class ChatExchange:
    messages: list[dict]
    response: str
    usage: ChatUsage


@dataclass
class _ScriptRule:
    when_contains: str
    reply: str


@dataclass
class _Script:
    rules: list[_ScriptRule] = field(default_factory=list)
    default: str | None = None


def _load_script(path: str | Path) -> _Script:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot load llm script: {exc}") from exc
    if not isinstance(raw, list):
        raise ConfigurationError("llm script must be a JSON list")
    script = _Script()
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ConfigurationError(f"llm script entry {i} must be an object")
        if "when_contains" in entry:
            script.rules.append(
                _ScriptRule(
                    when_contains=str(entry["when_contains"]),
                    reply=str(entry.get("reply", "")),
                )
            )
        elif "default" in entry:
            script.default = str(entry["default"])
        else:
            raise ConfigurationError(
                f"llm script entry {i} needs when_contains or default"
            )
    return script


def _last_user_message(messages: list[dict]) -> str:
    for message in reversed(messages):
        if message.get("role") == "user":
            return str(message.get("content", ""))
    return ""


class LlmGateway:
    """Thread-safe completion client bound to one config."""

    def __init__(
        self,
        config: LlmConfig,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        config.validate()
        self.config = config
        self._sleep = sleep
        self._session = session
        self._script: _Script | None = None
        if config.backend == BACKEND_SCRIPTED:
            self._script = _load_script(config.script_path)
        cap = 1 if config.backend == BACKEND_SCRIPTED else config.max_in_flight
        self._slots = threading.BoundedSemaphore(cap)

    def complete(self, messages: list[dict]) -> ChatExchange:
        with self._slots:
            if self.config.backend == BACKEND_SCRIPTED:
                response = self._scripted_reply(messages)
                usage = None
            else:
                response, usage = self._http_reply(messages)
        if usage is None:
            usage = ChatUsage(
                prompt_tokens=sum(
                    estimate_tokens(str(m.get("content", ""))) for m in messages
                ),
                completion_tokens=estimate_tokens(response),
            )
        return ChatExchange(messages=list(messages), response=response, usage=usage)

    # -- scripted ----------------------------------------------------------

    def _scripted_reply(self, messages: list[dict]) -> str:
        assert self._script is not None
        probe = _last_user_message(messages)
        for rule in self._script.rules:
            if rule.when_contains in probe:
                return rule.reply
        if self._script.default is not None:
            return self._script.default
        raise ScriptError(
            f"script has no entry matching the last user message and no "
            f"default (message starts: {probe[:80]!r})"
        )

    # -- http ---------------------------------------------------------------

    def _http_reply(self, messages: list[dict]) -> tuple[str, ChatUsage | None]:
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise ConfigurationError(
                f"api key env var {self.config.api_key_env} is not set"
            )
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        body = {
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
        }
        headers = {"Authorization": f"Bearer {key}"}
        session = self._session or requests.Session()

        last_error: str = ""
        attempts = self.config.max_retries + 1
        for attempt in range(attempts):
            if attempt:
                self._sleep(_BACKOFF_BASE_SECONDS * (2 ** (attempt - 1)))
            try:
                resp = session.post(
                    url, json=body, headers=headers, timeout=self.config.timeout
                )
            except requests.RequestException as exc:
                last_error = f"transport error: {exc}"
                logger.warning("llm request failed (attempt %d): %s", attempt + 1, exc)
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_error = f"status {resp.status_code}"
                logger.warning(
                    "llm request got %s (attempt %d)", resp.status_code, attempt + 1
                )
                continue
            if resp.status_code != 200:
                raise GatewayError(
                    f"gateway rejected request: status {resp.status_code}: "
                    f"{resp.text[:200]}"
                )
            return self._parse_http_payload(resp)
        raise GatewayError(f"gateway unavailable after {attempts} attempts ({last_error})")

    @staticmethod
    def _parse_http_payload(resp) -> tuple[str, ChatUsage | None]:
        try:
            data = resp.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise GatewayError(f"malformed gateway response: {exc}") from exc
        usage = None
        raw_usage = data.get("usage")
        if isinstance(raw_usage, dict):
            try:
                usage = ChatUsage(
                    prompt_tokens=int(raw_usage["prompt_tokens"]),
                    completion_tokens=int(raw_usage["completion_tokens"]),
                )
            except (KeyError, TypeError, ValueError):
                usage = None
        return str(content), usage


def complete(config: LlmConfig, messages: list[dict]) -> ChatExchange:
    """One-shot completion for callers that do not hold a gateway."""
    return LlmGateway(config).complete(messages)
