import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def shop_manifest() -> dict:
    return json.loads((FIXTURES / "shop_manifest.json").read_text())


@pytest.fixture()
def shop_catalog():
    from docweaver.catalog import parse_repository

    return parse_repository(FIXTURES / "shop_repo")


@pytest.fixture()
def shop_graph(shop_catalog):
    from docweaver.graph import extract_dependencies

    return extract_dependencies(shop_catalog)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion, when those tests ran."""
    try:
        from test_acceptance import CRITERIA
    except ImportError:
        return
    reports = []
    for outcome in ("passed", "failed", "error"):
        reports.extend(terminalreporter.stats.get(outcome, []))
    lines = []
    for test_name, label in CRITERIA.items():
        calls = [
            r
            for r in reports
            if getattr(r, "when", "call") == "call"
            and r.nodeid.endswith(f"::{test_name}")
        ]
        if not calls:
            continue
        ok = all(r.passed for r in calls)
        lines.append(f"{'PASS' if ok else 'FAIL'}  {label}")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
