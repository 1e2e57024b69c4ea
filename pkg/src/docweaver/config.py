"""Run configuration: one JSON file, strictly validated.

Unknown keys are rejected by name at every nesting level so typos fail
loudly instead of silently using a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .agents import MODE_AGENT, MODE_CHAT, IterationLimits
from .context import TokenBudget
from .errors import ConfigurationError
from .llm import LlmConfig

ORDER_TOPOLOGICAL = "topological"
ORDER_RANDOM = "random"

DEFAULT_BUDGET_TOKENS = 8192


@dataclass
class RunConfig:
    repo_path: str
    output_dir: str = "runs"
    llm: LlmConfig | None = None
    judge_llm: LlmConfig | None = None
    limits: IterationLimits = field(default_factory=IterationLimits)
    budget: TokenBudget = field(
        default_factory=lambda: TokenBudget(limit=DEFAULT_BUDGET_TOKENS)
    )
    mode: str = MODE_AGENT
    order: str = ORDER_TOPOLOGICAL
    seed: int | None = None
    overwrite_existing: bool = False
    retriever: dict | None = None
    reference_call_sites: int = 3
    in_place: bool = False

    def validate(self) -> None:
        if self.mode not in (MODE_AGENT, MODE_CHAT):
            raise ConfigurationError(
                f"mode must be {MODE_AGENT!r} or {MODE_CHAT!r}, got {self.mode!r}"
            )
        if self.order not in (ORDER_TOPOLOGICAL, ORDER_RANDOM):
            raise ConfigurationError(
                f"order must be {ORDER_TOPOLOGICAL!r} or {ORDER_RANDOM!r}, "
                f"got {self.order!r}"
            )
        if self.order == ORDER_RANDOM and self.seed is None:
            raise ConfigurationError("order=random requires a seed")
        if self.order == ORDER_TOPOLOGICAL and self.seed is not None:
            raise ConfigurationError("seed is only meaningful with order=random")
        if self.budget.limit <= 0:
            raise ConfigurationError("budget limit must be positive")
        if self.reference_call_sites < 1:
            raise ConfigurationError("reference_call_sites must be >= 1")
        for name in (
            "max_reader_searcher_rounds",
            "max_writer_verifier_rounds",
            "max_outer_cycles",
        ):
            if getattr(self.limits, name) < 1:
                raise ConfigurationError(f"limits.{name} must be >= 1")
        if self.llm is not None:
            self.llm.validate()
        if self.judge_llm is not None:
            self.judge_llm.validate()
        if self.retriever is not None:
            kind = self.retriever.get("kind")
            if kind not in ("null", "fixture"):
                raise ConfigurationError(
                    f"retriever.kind must be 'null' or 'fixture', got {kind!r}"
                )
            if kind == "fixture" and not self.retriever.get("path"):
                raise ConfigurationError("retriever.kind=fixture requires a path")


def _check_keys(data: dict, allowed: set[str], where: str) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigurationError(f"unknown config key: {where}{key}")


def _llm_from_dict(data: dict, where: str) -> LlmConfig:
    allowed = {f.name for f in fields(LlmConfig)}
    _check_keys(data, allowed, where)
    return LlmConfig(**data)


def parse_config(data: dict) -> RunConfig:
    """Build and validate a RunConfig from an already-decoded dict."""
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a JSON object")
    top_allowed = {f.name for f in fields(RunConfig)}
    _check_keys(data, top_allowed, "")

    if "repo_path" not in data:
        raise ConfigurationError("missing required config key: repo_path")

    kwargs: dict = {}
    for key, value in data.items():
        if key in ("llm", "judge_llm"):
            if not isinstance(value, dict):
                raise ConfigurationError(f"{key} must be an object")
            kwargs[key] = _llm_from_dict(value, f"{key}.")
        elif key == "limits":
            if not isinstance(value, dict):
                raise ConfigurationError("limits must be an object")
            allowed = {f.name for f in fields(IterationLimits)}
            _check_keys(value, allowed, "limits.")
            kwargs[key] = IterationLimits(**value)
        elif key == "budget":
            if not isinstance(value, dict):
                raise ConfigurationError("budget must be an object")
            _check_keys(value, {"limit"}, "budget.")
            kwargs[key] = TokenBudget(limit=int(value["limit"]))
        elif key == "retriever":
            if not isinstance(value, dict):
                raise ConfigurationError("retriever must be an object")
            _check_keys(value, {"kind", "path"}, "retriever.")
            kwargs[key] = value
        else:
            kwargs[key] = value

    config = RunConfig(**kwargs)
    config.validate()
    return config


def load_config(path: str | Path) -> RunConfig:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    return parse_config(data)


def config_to_dict(config: RunConfig) -> dict:
    """Serialization inverse of parse_config (semantically idempotent)."""

    def llm_dict(llm: LlmConfig | None) -> dict | None:
        if llm is None:
            return None
        return {
            "backend": llm.backend,
            "base_url": llm.base_url,
            "model": llm.model,
            "api_key_env": llm.api_key_env,
            "timeout": llm.timeout,
            "max_retries": llm.max_retries,
            "temperature": llm.temperature,
            "script_path": llm.script_path,
            "max_in_flight": llm.max_in_flight,
        }

    out = {
        "repo_path": config.repo_path,
        "output_dir": config.output_dir,
        "limits": {
            "max_reader_searcher_rounds": config.limits.max_reader_searcher_rounds,
            "max_writer_verifier_rounds": config.limits.max_writer_verifier_rounds,
            "max_outer_cycles": config.limits.max_outer_cycles,
        },
        "budget": {"limit": config.budget.limit},
        "mode": config.mode,
        "order": config.order,
        "overwrite_existing": config.overwrite_existing,
        "reference_call_sites": config.reference_call_sites,
        "in_place": config.in_place,
    }
    if config.seed is not None:
        out["seed"] = config.seed
    if config.llm is not None:
        out["llm"] = llm_dict(config.llm)
    if config.judge_llm is not None:
        out["judge_llm"] = llm_dict(config.judge_llm)
    if config.retriever is not None:
        out["retriever"] = dict(config.retriever)
    return out
