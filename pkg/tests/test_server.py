"""HTTP API behavior, exercised through the in-process test client."""

from __future__ import annotations

import json
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from docweaver.catalog import parse_repository
from docweaver.config import RunConfig, parse_config
from docweaver.llm import LlmConfig
from docweaver.runner import execute_run, write_reports, evaluate_tree
from docweaver.server import create_app
from docweaver.workspace import RunLock

from _support import judge_script, perfect_script, write_script

FIXTURES = Path(__file__).parent / "fixtures"
SHOP = FIXTURES / "shop_repo"

DEADLINE = 30.0


def run_body(tmp_path: Path, **extra) -> dict:
    """Config body for POST /runs wired to a scripted gateway."""
    tmp_path.mkdir(parents=True, exist_ok=True)
    catalog = parse_repository(SHOP)
    script = write_script(tmp_path, perfect_script(catalog))
    body = {
        "repo_path": str(SHOP),
        "output_dir": str(tmp_path / "runs"),
        "llm": {"backend": "scripted", "script_path": str(script)},
    }
    body.update(extra)
    return body


def wait_for(client: TestClient, run_id: str, *, until=("completed", "failed")):
    deadline = time.monotonic() + DEADLINE
    while time.monotonic() < deadline:
        response = client.get(f"/runs/{run_id}")
        if response.status_code == 200 and response.json()["status"] in until:
            return response.json()
        time.sleep(0.02)
    raise AssertionError(f"run {run_id} never reached {until}")


def start_and_finish(client: TestClient, body: dict) -> str:
    response = client.post("/runs", json=body)
    assert response.status_code == 202, response.text
    run_id = response.json()["run_id"]
    summary = wait_for(client, run_id)
    assert summary["status"] == "completed", summary
    return run_id


def sse_events(text: str) -> list[tuple[str, dict]]:
    events = []
    for block in text.strip().split("\n\n"):
        lines = block.splitlines()
        assert lines[0].startswith("event: ")
        assert lines[1].startswith("data: ")
        events.append((lines[0][7:], json.loads(lines[1][6:])))
    return events


@pytest.fixture()
def client():
    with TestClient(create_app()) as c:
        yield c


class TestStartRun:
    def test_accepted_and_completes(self, client, tmp_path, shop_catalog):
        body = run_body(tmp_path)
        run_id = start_and_finish(client, body)
        assert run_id == "run-0001"
        summary = client.get(f"/runs/{run_id}").json()
        assert summary["components"] == len(shop_catalog.components)
        assert summary["processed"] == len(shop_catalog.components) - 3
        assert summary["order"] == "topological"

    def test_bad_repo_path(self, client, tmp_path):
        body = run_body(tmp_path, repo_path=str(tmp_path / "absent"))
        response = client.post("/runs", json=body)
        assert response.status_code == 422
        assert response.json()["field"] == "repo_path"

    def test_unknown_config_key(self, client, tmp_path):
        body = run_body(tmp_path)
        body["outputdir"] = "x"
        response = client.post("/runs", json=body)
        assert response.status_code == 422
        assert "outputdir" in response.json()["detail"]

    def test_gateway_failure_creates_nothing(self, client, tmp_path):
        body = run_body(tmp_path)
        body["llm"]["script_path"] = str(tmp_path / "absent.json")
        response = client.post("/runs", json=body)
        assert response.status_code == 422
        runs = tmp_path / "runs"
        assert not runs.exists() or not list(runs.glob("run-*"))

    def test_locked_output_dir_conflicts(self, client, tmp_path):
        body = run_body(tmp_path)
        out = tmp_path / "runs"
        out.mkdir()
        lock = RunLock(out)
        lock.acquire()
        try:
            response = client.post("/runs", json=body)
            assert response.status_code == 409
            assert "locked" in response.json()["detail"]
        finally:
            lock.release()
        # once released the same body is accepted
        response = client.post("/runs", json=body)
        assert response.status_code == 202
        wait_for(client, response.json()["run_id"])

    def test_gateway_collapse_degrades_per_component(self, client, tmp_path):
        # a script with no matching entries fails every llm call; the run
        # still finishes, with each component marked failed
        tmp_path.mkdir(parents=True, exist_ok=True)
        script = write_script(
            tmp_path, [{"when_contains": "never-matches", "reply": "x"}]
        )
        body = {
            "repo_path": str(SHOP),
            "output_dir": str(tmp_path / "runs"),
            "llm": {"backend": "scripted", "script_path": str(script)},
        }
        response = client.post("/runs", json=body)
        assert response.status_code == 202
        run_id = response.json()["run_id"]
        summary = wait_for(client, run_id)
        assert summary["status"] == "completed"
        statuses = set(summary["statuses"].values())
        assert statuses == {"failed"}

    def test_failed_status_wins_over_event_inspection(self, client, tmp_path):
        run_id = start_and_finish(client, run_body(tmp_path))
        registry = client.app.state.registry
        registry.errors[run_id] = "disk filled up"
        summary = client.get(f"/runs/{run_id}").json()
        assert summary["status"] == "failed"
        assert summary["error"] == "disk filled up"


class TestListRuns:
    def test_empty(self, client):
        assert client.get("/runs").json() == {"runs": []}

    def test_lists_completed_runs(self, client, tmp_path):
        body = run_body(tmp_path)
        first = start_and_finish(client, body)
        second = start_and_finish(client, body)
        runs = client.get("/runs").json()["runs"]
        assert [r["run_id"] for r in runs] == [first, second]
        assert all(r["status"] == "completed" for r in runs)

    def test_unknown_run_detail(self, client):
        assert client.get("/runs/run-9999").status_code == 404

    def test_sees_runs_made_outside_the_server(self, tmp_path, shop_catalog):
        config = RunConfig(
            repo_path=str(SHOP),
            output_dir=str(tmp_path / "runs"),
            llm=LlmConfig(
                backend="scripted",
                script_path=str(
                    write_script(tmp_path, perfect_script(shop_catalog))
                ),
            ),
        )
        result = execute_run(config)
        with TestClient(create_app(config)) as client:
            runs = client.get("/runs").json()["runs"]
            assert [r["run_id"] for r in runs] == [result.run_id]
            assert runs[0]["status"] == "completed"

    def test_interrupted_status(self, tmp_path, shop_catalog):
        config = RunConfig(
            repo_path=str(SHOP),
            output_dir=str(tmp_path / "runs"),
            llm=LlmConfig(
                backend="scripted",
                script_path=str(
                    write_script(tmp_path, perfect_script(shop_catalog))
                ),
            ),
        )

        class Die:
            def __init__(self):
                self.seen = 0

            def __call__(self, event):
                if event["kind"] == "component_done":
                    self.seen += 1
                    if self.seen >= 4:
                        raise KeyboardInterrupt

        with pytest.raises(KeyboardInterrupt):
            execute_run(config, console=Die())
        with TestClient(create_app(config)) as client:
            runs = client.get("/runs").json()["runs"]
            assert runs[0]["status"] == "interrupted"


class TestComponents:
    def test_plan_order_and_docstrings(self, client, tmp_path, shop_catalog):
        run_id = start_and_finish(client, run_body(tmp_path))
        data = client.get(f"/runs/{run_id}/components").json()
        names = [c["qualified_name"] for c in data["components"]]
        assert sorted(names) == sorted(
            c.qualified_name for c in shop_catalog.components
        )
        detail = client.get(f"/runs/{run_id}").json()
        assert names == detail["plan"]
        for comp in data["components"]:
            assert comp["docstring"]  # seeded or generated
        approved = [c for c in data["components"] if c["status"] == "approved"]
        assert len(approved) == len(shop_catalog.components) - 3

    def test_unknown_run(self, client):
        assert client.get("/runs/run-0404/components").status_code == 404


class TestEvents:
    def test_replay_is_ordered_and_terminated(self, client, tmp_path):
        run_id = start_and_finish(client, run_body(tmp_path))
        response = client.get(f"/runs/{run_id}/events")
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/event-stream")
        events = sse_events(response.text)
        seqs = [payload["seq"] for _kind, payload in events]
        assert seqs == list(range(1, len(seqs) + 1))
        assert events[-1][0] == "run_done"
        for kind, payload in events:
            assert kind == payload["kind"]
            assert set(payload) == {"seq", "kind", "component", "payload"}

    def test_from_filter_is_inclusive(self, client, tmp_path):
        run_id = start_and_finish(client, run_body(tmp_path))
        full = sse_events(client.get(f"/runs/{run_id}/events").text)
        tail = sse_events(client.get(f"/runs/{run_id}/events?from=5").text)
        assert [p["seq"] for _k, p in tail] == [
            p["seq"] for _k, p in full if p["seq"] >= 5
        ]
        assert tail[0][1]["seq"] == 5

    def test_live_stream_follows_a_running_pipeline(self, client, tmp_path):
        response = client.post("/runs", json=run_body(tmp_path))
        assert response.status_code == 202
        run_id = response.json()["run_id"]
        deadline = time.monotonic() + DEADLINE
        while client.get(f"/runs/{run_id}").status_code != 200:
            assert time.monotonic() < deadline
            time.sleep(0.01)
        events = sse_events(client.get(f"/runs/{run_id}/events").text)
        assert events[-1][0] == "run_done"

    def test_unknown_run(self, client):
        assert client.get("/runs/run-0404/events").status_code == 404


class TestReportEndpoint:
    def test_missing_then_present(self, client, tmp_path):
        run_id = start_and_finish(client, run_body(tmp_path))
        assert client.get(f"/runs/{run_id}/report").status_code == 404
        run_dir = tmp_path / "runs" / run_id
        catalog = parse_repository(run_dir / "patched")
        write_reports(
            run_dir / "reports", evaluate_tree(catalog, ("completeness",))
        )
        response = client.get(f"/runs/{run_id}/report")
        assert response.status_code == 200
        assert "completeness" in response.json()["summary"]["means"]


class TestEvaluateEndpoint:
    def test_completeness_needs_no_judge(self, client, tmp_path):
        start_and_finish(client, run_body(tmp_path))
        response = client.post("/components/shop.cart.Cart.add/evaluate")
        assert response.status_code == 200
        body = response.json()
        assert body["component"] == "shop.cart.Cart.add"
        assert body["score"] == 1.0

    def test_repeat_body_is_identical(self, client, tmp_path):
        start_and_finish(client, run_body(tmp_path))
        first = client.post("/components/shop.cart.Cart.add/evaluate")
        second = client.post("/components/shop.cart.Cart.add/evaluate")
        assert first.content == second.content

    def test_judged_axis_without_judge(self, client, tmp_path):
        start_and_finish(client, run_body(tmp_path))
        response = client.post(
            "/components/shop.cart.Cart.add/evaluate?axis=helpfulness"
        )
        assert response.status_code == 409
        assert "judge_llm" in response.json()["detail"]

    def test_judged_axis_with_judge_and_cache(self, client, tmp_path):
        judge_path = write_script(tmp_path, judge_script(), name="judge.json")
        body = run_body(
            tmp_path,
            judge_llm={"backend": "scripted", "script_path": str(judge_path)},
        )
        start_and_finish(client, body)
        first = client.post(
            "/components/shop.cart.Cart.add/evaluate?axis=helpfulness"
        )
        assert first.status_code == 200
        assert "overall" in first.json()

        # the cache must answer repeats without rebuilding the judge
        judge_path.unlink()
        second = client.post(
            "/components/shop.cart.Cart.add/evaluate?axis=helpfulness"
        )
        assert second.status_code == 200
        assert second.content == first.content
        # a fresh component does need the judge, which is now gone
        other = client.post(
            "/components/shop.cart.Cart.total/evaluate?axis=helpfulness"
        )
        assert other.status_code == 422

    def test_truthfulness_axis(self, client, tmp_path):
        judge_path = write_script(tmp_path, judge_script(), name="judge.json")
        body = run_body(
            tmp_path,
            judge_llm={"backend": "scripted", "script_path": str(judge_path)},
        )
        start_and_finish(client, body)
        response = client.post(
            "/components/shop.cart.Cart.add/evaluate?axis=truthfulness"
        )
        assert response.status_code == 200
        assert response.json()["existence_ratio"] in (None, 1.0)

    def test_invalid_axis(self, client, tmp_path):
        start_and_finish(client, run_body(tmp_path))
        response = client.post("/components/shop.cart.Cart.add/evaluate?axis=vibes")
        assert response.status_code == 422

    def test_unknown_component(self, client, tmp_path):
        start_and_finish(client, run_body(tmp_path))
        response = client.post("/components/shop.never.existed/evaluate")
        assert response.status_code == 404

    def test_needs_run_hint_with_multiple_runs(self, client, tmp_path):
        body = run_body(tmp_path)
        first = start_and_finish(client, body)
        start_and_finish(client, body)
        response = client.post("/components/shop.cart.Cart.add/evaluate")
        assert response.status_code == 404
        assert "2 runs" in response.json()["detail"]
        response = client.post(
            f"/components/shop.cart.Cart.add/evaluate?run={first}"
        )
        assert response.status_code == 200

    def test_unknown_run_reference(self, client, tmp_path):
        start_and_finish(client, run_body(tmp_path))
        response = client.post(
            "/components/shop.cart.Cart.add/evaluate?run=run-0042"
        )
        assert response.status_code == 404

    def test_no_runs_at_all(self, client):
        response = client.post("/components/shop.cart.Cart.add/evaluate")
        assert response.status_code == 404
