import json

import pytest

from docweaver.config import (
    DEFAULT_BUDGET_TOKENS,
    ORDER_RANDOM,
    ORDER_TOPOLOGICAL,
    RunConfig,
    config_to_dict,
    load_config,
    parse_config,
)
from docweaver.agents import MODE_AGENT, MODE_CHAT
from docweaver.errors import ConfigurationError


def minimal() -> dict:
    return {"repo_path": "some/repo"}


class TestParseDefaults:
    def test_minimal_config(self):
        cfg = parse_config(minimal())
        assert cfg.repo_path == "some/repo"
        assert cfg.output_dir == "runs"
        assert cfg.mode == MODE_AGENT
        assert cfg.order == ORDER_TOPOLOGICAL
        assert cfg.seed is None
        assert cfg.budget.limit == DEFAULT_BUDGET_TOKENS
        assert cfg.limits.max_reader_searcher_rounds == 3
        assert cfg.limits.max_writer_verifier_rounds == 2
        assert cfg.limits.max_outer_cycles == 2
        assert cfg.overwrite_existing is False
        assert cfg.llm is None
        assert cfg.judge_llm is None
        assert cfg.retriever is None
        assert cfg.reference_call_sites == 3
        assert cfg.in_place is False

    def test_repo_path_required(self):
        with pytest.raises(ConfigurationError, match="repo_path"):
            parse_config({"mode": MODE_CHAT})

    def test_non_object_rejected(self):
        with pytest.raises(ConfigurationError, match="JSON object"):
            parse_config(["repo_path"])

    def test_full_config(self):
        cfg = parse_config(
            {
                "repo_path": "r",
                "output_dir": "out",
                "mode": MODE_CHAT,
                "order": ORDER_RANDOM,
                "seed": 7,
                "overwrite_existing": True,
                "budget": {"limit": 4000},
                "limits": {
                    "max_reader_searcher_rounds": 1,
                    "max_writer_verifier_rounds": 1,
                    "max_outer_cycles": 1,
                },
                "llm": {"backend": "scripted", "script_path": "s.json"},
                "judge_llm": {
                    "backend": "http",
                    "base_url": "http://judge",
                    "model": "m",
                },
                "retriever": {"kind": "null"},
                "reference_call_sites": 5,
                "in_place": True,
            }
        )
        assert cfg.mode == MODE_CHAT
        assert cfg.order == ORDER_RANDOM
        assert cfg.seed == 7
        assert cfg.budget.limit == 4000
        assert cfg.limits.call_budget == 1 * (1 + 1) + 2
        assert cfg.llm.backend == "scripted"
        assert cfg.judge_llm.base_url == "http://judge"
        assert cfg.retriever == {"kind": "null"}
        assert cfg.reference_call_sites == 5
        assert cfg.in_place is True


class TestUnknownKeys:
    def test_top_level_typo(self):
        with pytest.raises(ConfigurationError, match="unknown config key: outputdir"):
            parse_config({"repo_path": "r", "outputdir": "x"})

    def test_nested_llm_typo(self):
        with pytest.raises(ConfigurationError, match="llm.modle"):
            parse_config({"repo_path": "r", "llm": {"modle": "x"}})

    def test_nested_limits_typo(self):
        with pytest.raises(ConfigurationError, match="limits.max_rounds"):
            parse_config({"repo_path": "r", "limits": {"max_rounds": 2}})

    def test_nested_budget_typo(self):
        with pytest.raises(ConfigurationError, match="budget.tokens"):
            parse_config({"repo_path": "r", "budget": {"tokens": 100}})

    def test_nested_retriever_typo(self):
        with pytest.raises(ConfigurationError, match="retriever.mode"):
            parse_config(
                {"repo_path": "r", "retriever": {"kind": "null", "mode": "x"}}
            )


class TestValidation:
    def test_bad_mode(self):
        with pytest.raises(ConfigurationError, match="mode"):
            parse_config({"repo_path": "r", "mode": "turbo"})

    def test_bad_order(self):
        with pytest.raises(ConfigurationError, match="order"):
            parse_config({"repo_path": "r", "order": "alphabetical"})

    def test_random_requires_seed(self):
        with pytest.raises(ConfigurationError, match="seed"):
            parse_config({"repo_path": "r", "order": ORDER_RANDOM})

    def test_seed_with_topological_rejected(self):
        with pytest.raises(ConfigurationError, match="order=random"):
            parse_config({"repo_path": "r", "seed": 3})

    def test_nonpositive_budget(self):
        with pytest.raises(ConfigurationError, match="budget"):
            parse_config({"repo_path": "r", "budget": {"limit": 0}})

    def test_zero_limits(self):
        with pytest.raises(ConfigurationError, match="max_outer_cycles"):
            parse_config({"repo_path": "r", "limits": {"max_outer_cycles": 0}})

    def test_reference_call_sites_floor(self):
        with pytest.raises(ConfigurationError, match="reference_call_sites"):
            parse_config({"repo_path": "r", "reference_call_sites": 0})

    def test_bad_retriever_kind(self):
        with pytest.raises(ConfigurationError, match="retriever.kind"):
            parse_config({"repo_path": "r", "retriever": {"kind": "web"}})

    def test_fixture_retriever_needs_path(self):
        with pytest.raises(ConfigurationError, match="path"):
            parse_config({"repo_path": "r", "retriever": {"kind": "fixture"}})

    def test_http_llm_validated(self):
        # http backend without base_url is invalid at the LlmConfig level
        with pytest.raises(ConfigurationError):
            parse_config({"repo_path": "r", "llm": {"backend": "http"}})


class TestFileLoading:
    def test_load_from_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"repo_path": "r", "mode": MODE_CHAT}))
        cfg = load_config(path)
        assert cfg.mode == MODE_CHAT

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="cannot read"):
            load_config(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{not json")
        with pytest.raises(ConfigurationError, match="not valid JSON"):
            load_config(path)


class TestRoundTrip:
    def test_to_dict_then_parse(self):
        original = parse_config(
            {
                "repo_path": "r",
                "order": ORDER_RANDOM,
                "seed": 11,
                "budget": {"limit": 1234},
                "llm": {"backend": "scripted", "script_path": "s.json"},
                "retriever": {"kind": "fixture", "path": "kb.json"},
            }
        )
        data = config_to_dict(original)
        reparsed = parse_config(data)
        assert config_to_dict(reparsed) == data

    def test_minimal_round_trip_omits_optionals(self):
        data = config_to_dict(parse_config(minimal()))
        assert "llm" not in data
        assert "judge_llm" not in data
        assert "seed" not in data
        assert "retriever" not in data
        assert parse_config(data).repo_path == "some/repo"

    def test_round_trip_is_json_safe(self):
        data = config_to_dict(
            parse_config(
                {"repo_path": "r", "llm": {"backend": "scripted", "script_path": "s"}}
            )
        )
        assert parse_config(json.loads(json.dumps(data))).llm.backend == "scripted"
