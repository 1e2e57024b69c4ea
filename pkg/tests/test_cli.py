"""Command-line behavior: exit codes, stdout contracts, error text."""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import pytest

from docweaver import cli
from docweaver.catalog import parse_repository
from docweaver.workspace import PATCHED_DIR, STATE_FILE, TRANSCRIPTS_DIR

from _support import judge_script, perfect_script, write_config, write_script

FIXTURES = Path(__file__).parent / "fixtures"
SHOP = FIXTURES / "shop_repo"
COVERAGE_MIX = FIXTURES / "coverage_mix"


def cli_config(tmp_path: Path, repo: Path = SHOP, **extra) -> Path:
    """Write a config JSON wired to a scripted gateway for the repo."""
    tmp_path.mkdir(parents=True, exist_ok=True)
    catalog = parse_repository(repo)
    script = write_script(tmp_path, perfect_script(catalog))
    data = {
        "repo_path": str(repo),
        "output_dir": str(tmp_path / "runs"),
        "llm": {"backend": "scripted", "script_path": str(script)},
    }
    data.update(extra)
    return write_config(tmp_path, data)


class TestAnalyze:
    def test_prints_counts_and_export_path(self, tmp_path, capsys, shop_catalog):
        config = cli_config(tmp_path)
        assert cli.main(["analyze", "--config", str(config)]) == 0
        out = capsys.readouterr().out
        assert f"components: {len(shop_catalog.components)}" in out
        assert "edges: " in out
        assert "sccs: " in out
        assert "graph export: " in out
        assert (tmp_path / "runs" / "graph.json").exists()

    def test_out_flag_redirects_export(self, tmp_path, capsys):
        config = cli_config(tmp_path)
        other = tmp_path / "elsewhere"
        assert cli.main(["analyze", "--config", str(config), "--out", str(other)]) == 0
        assert (other / "graph.json").exists()

    def test_missing_repo_fails(self, tmp_path, capsys):
        config = write_config(
            tmp_path, {"repo_path": str(tmp_path / "absent")}
        )
        assert cli.main(["analyze", "--config", str(config)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        assert cli.main(["analyze", "--config", str(tmp_path / "nope.json")]) == 1
        assert "error:" in capsys.readouterr().err

    def test_invalid_config_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{", encoding="utf-8")
        assert cli.main(["analyze", "--config", str(bad)]) == 1
        assert "error:" in capsys.readouterr().err


class TestPlan:
    def test_lists_every_component_in_order(self, tmp_path, capsys, shop_catalog):
        config = cli_config(tmp_path)
        assert cli.main(["plan", "--config", str(config)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == len(shop_catalog.components)
        assert lines[0].startswith("   1  ")
        names = [line.split(maxsplit=1)[1] for line in lines]
        assert sorted(names) == sorted(
            c.qualified_name for c in shop_catalog.components
        )

    def test_random_order_stable_for_a_seed(self, tmp_path, capsys):
        config = cli_config(tmp_path)
        argv = ["plan", "--config", str(config), "--order", "random", "--seed", "7"]
        assert cli.main(argv) == 0
        first = capsys.readouterr().out
        assert cli.main(argv) == 0
        assert capsys.readouterr().out == first

    def test_random_order_without_seed_fails(self, tmp_path, capsys):
        config = cli_config(tmp_path)
        code = cli.main(["plan", "--config", str(config), "--order", "random"])
        assert code == 1
        assert "seed" in capsys.readouterr().err

    def test_rejects_unknown_order_value(self, tmp_path):
        config = cli_config(tmp_path)
        with pytest.raises(SystemExit) as exc:
            cli.main(["plan", "--config", str(config), "--order", "sideways"])
        assert exc.value.code == 2


class TestGenerate:
    def test_full_run_output(self, tmp_path, capsys):
        config = cli_config(tmp_path)
        assert cli.main(["generate", "--config", str(config)]) == 0
        out = capsys.readouterr().out
        assert "-> shop.cart.Cart.add" in out
        assert "shop.cart.Cart.add: approved" in out
        assert "done: 14 components, 14 approved" in out
        assert "run directory: " in out
        run_dir = tmp_path / "runs" / "run-0001"
        assert (run_dir / STATE_FILE).exists()

    def test_patched_tree_written(self, tmp_path, capsys):
        config = cli_config(tmp_path)
        cli.main(["generate", "--config", str(config)])
        patched = tmp_path / "runs" / "run-0001" / PATCHED_DIR
        assert (patched / "shop" / "cart.py").exists()
        text = (patched / "shop" / "cart.py").read_text(encoding="utf-8")
        assert '"""' in text

    def test_overwrite_flag_processes_documented(self, tmp_path, capsys, shop_catalog):
        config = cli_config(tmp_path)
        assert cli.main(["generate", "--config", str(config), "--overwrite"]) == 0
        out = capsys.readouterr().out
        total = len(shop_catalog.components)
        assert f"done: {total} components, {total} approved" in out

    def test_chat_mode_one_call_per_component(self, tmp_path, capsys):
        config = cli_config(tmp_path)
        assert cli.main(["generate", "--config", str(config), "--mode", "chat"]) == 0
        transcripts = tmp_path / "runs" / "run-0001" / TRANSCRIPTS_DIR
        files = sorted(transcripts.glob("*.json"))
        assert files
        for path in files:
            data = json.loads(path.read_text(encoding="utf-8"))
            assert data["rounds_used"]["llm_calls"] == 1

    def test_random_order_reproducible(self, tmp_path, capsys):
        config = cli_config(tmp_path)
        argv = [
            "generate",
            "--config",
            str(config),
            "--order",
            "random",
            "--seed",
            "11",
        ]
        assert cli.main(argv) == 0
        capsys.readouterr()
        assert cli.main(argv) == 0
        capsys.readouterr()
        plan_a = json.loads(
            (tmp_path / "runs" / "run-0001" / STATE_FILE).read_text()
        )["plan_names"]
        plan_b = json.loads(
            (tmp_path / "runs" / "run-0002" / STATE_FILE).read_text()
        )["plan_names"]
        assert plan_a == plan_b

    def test_resume_finished_run(self, tmp_path, capsys):
        config = cli_config(tmp_path)
        cli.main(["generate", "--config", str(config)])
        capsys.readouterr()
        assert cli.main(["generate", "--config", str(config), "--resume"]) == 0
        out = capsys.readouterr().out
        assert "done: 0 components, 0 approved" in out

    def test_resume_without_runs_fails(self, tmp_path, capsys):
        config = cli_config(tmp_path)
        assert cli.main(["generate", "--config", str(config), "--resume"]) == 1
        assert "no run directories" in capsys.readouterr().err

    def test_broken_gateway_leaves_no_run(self, tmp_path, capsys):
        config = write_config(
            tmp_path,
            {
                "repo_path": str(SHOP),
                "output_dir": str(tmp_path / "runs"),
                "llm": {
                    "backend": "scripted",
                    "script_path": str(tmp_path / "absent.json"),
                },
            },
        )
        assert cli.main(["generate", "--config", str(config)]) == 1
        assert "error:" in capsys.readouterr().err
        runs = tmp_path / "runs"
        assert not runs.exists() or not list(runs.glob("run-*"))


class TestEvaluate:
    def finished_run(self, tmp_path) -> Path:
        config = cli_config(tmp_path)
        assert cli.main(["generate", "--config", str(config)]) == 0
        return tmp_path / "runs" / "run-0001"

    def test_run_dir_report(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        run_dir = self.finished_run(tmp_path)
        capsys.readouterr()
        assert cli.main(["evaluate", str(run_dir)]) == 0
        out = capsys.readouterr().out
        assert "Completeness" in out
        assert "report: " in out
        assert (run_dir / "reports" / "evaluation.json").exists()
        assert (run_dir / "reports" / "evaluation.txt").exists()

    def test_raw_repo_with_out_dir(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        out_dir = tmp_path / "scores"
        code = cli.main(["evaluate", str(SHOP), "--out", str(out_dir)])
        assert code == 0
        assert (out_dir / "evaluation.json").exists()

    def test_default_out_dir_is_reports(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert cli.main(["evaluate", str(SHOP)]) == 0
        assert (tmp_path / "reports" / "evaluation.json").exists()

    def test_judged_axis_needs_judge_config(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        run_dir = self.finished_run(tmp_path)
        capsys.readouterr()
        code = cli.main(["evaluate", str(run_dir), "--axes", "helpfulness"])
        assert code == 1
        assert "judge" in capsys.readouterr().err

    def test_all_axes_with_judge(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        run_dir = self.finished_run(tmp_path)
        judge_path = write_script(tmp_path, judge_script(), name="judge.json")
        config = write_config(
            tmp_path,
            {
                "repo_path": str(SHOP),
                "judge_llm": {
                    "backend": "scripted",
                    "script_path": str(judge_path),
                },
            },
            name="judge_config.json",
        )
        capsys.readouterr()
        code = cli.main(
            [
                "evaluate",
                str(run_dir),
                "--axes",
                "all",
                "--config",
                str(config),
            ]
        )
        assert code == 0
        payload = json.loads(
            (run_dir / "reports" / "evaluation.json").read_text(encoding="utf-8")
        )
        assert payload["summary"]["means"]["truthfulness"]["overall"] == 1.0
        assert payload["summary"]["means"]["helpfulness"]["overall"] is not None

    def test_unknown_axis(self, tmp_path, capsys):
        assert cli.main(["evaluate", str(SHOP), "--axes", "vibes"]) == 1
        assert "vibes" in capsys.readouterr().err

    def test_missing_target(self, tmp_path, capsys):
        assert cli.main(["evaluate", str(tmp_path / "gone")]) == 1
        assert "no such path" in capsys.readouterr().err


class TestReport:
    def test_prints_saved_table(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        config = cli_config(tmp_path)
        cli.main(["generate", "--config", str(config)])
        run_dir = tmp_path / "runs" / "run-0001"
        cli.main(["evaluate", str(run_dir)])
        capsys.readouterr()
        assert cli.main(["report", str(run_dir)]) == 0
        assert "Completeness" in capsys.readouterr().out

    def test_accepts_explicit_json_path(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cli.main(["evaluate", str(SHOP), "--out", str(tmp_path / "r")])
        capsys.readouterr()
        assert cli.main(["report", str(tmp_path / "r" / "evaluation.json")]) == 0
        assert "Completeness" in capsys.readouterr().out

    def test_missing_report_fails(self, tmp_path, capsys):
        assert cli.main(["report", str(tmp_path)]) == 1
        assert "no evaluation report" in capsys.readouterr().err


class TestCoverage:
    def test_mixed_repo(self, capsys):
        assert cli.main(["coverage", str(COVERAGE_MIX)]) == 0
        out = capsys.readouterr().out
        assert "documentable components: 10" in out
        assert "documented: 3" in out
        assert "coverage: 0.300" in out
        assert "mean words per docstring: 3.0" in out

    def test_fully_documented_after_generate(self, tmp_path, capsys):
        config = cli_config(tmp_path)
        cli.main(["generate", "--config", str(config)])
        capsys.readouterr()
        patched = tmp_path / "runs" / "run-0001" / PATCHED_DIR
        assert cli.main(["coverage", str(patched)]) == 0
        assert "coverage: 1.000" in capsys.readouterr().out

    def test_repo_from_config(self, tmp_path, capsys):
        config = cli_config(tmp_path)
        assert cli.main(["coverage", "--config", str(config)]) == 0
        assert "documentable components:" in capsys.readouterr().out

    def test_needs_a_repo(self, capsys):
        assert cli.main(["coverage"]) == 1
        assert "repo path or --config" in capsys.readouterr().err

    def test_bad_path(self, tmp_path, capsys):
        assert cli.main(["coverage", str(tmp_path / "missing")]) == 1
        assert "not a directory" in capsys.readouterr().err


class TestUsage:
    def test_no_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            cli.main([])
        assert exc.value.code == 2

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["frobnicate"])
        assert exc.value.code == 2

    def test_analyze_requires_config(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["analyze"])
        assert exc.value.code == 2


class TestInPlace:
    def test_generate_patches_repo_directly(self, tmp_path, capsys):
        repo = tmp_path / "repo"
        shutil.copytree(SHOP, repo)
        config = cli_config(tmp_path, repo=repo, in_place=True)
        assert cli.main(["generate", "--config", str(config)]) == 0
        capsys.readouterr()
        assert cli.main(["coverage", str(repo)]) == 0
        assert "coverage: 1.000" in capsys.readouterr().out
