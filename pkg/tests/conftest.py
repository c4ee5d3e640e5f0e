from __future__ import annotations

import json
import re
from pathlib import Path

import pytest

from cak.session import AnalysisLevel, ToolkitConfig, create_session

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
JAVA_PROJECT = FIXTURES / "java-project"
PYTHON_PROJECT = FIXTURES / "python-project"
GROUND_TRUTH = FIXTURES / "ground_truth"
GOLDENS = HERE / "goldens"


def load_truth(language: str) -> dict:
    return json.loads((GROUND_TRUTH / f"{language}.json").read_text(encoding="utf-8"))


def golden(name: str) -> str:
    return (GOLDENS / name).read_bytes().decode("utf-8")


def source_files(project: Path, suffix: str) -> list[Path]:
    return sorted(p for p in project.rglob(f"*{suffix}") if p.is_file())


@pytest.fixture(scope="session")
def java_session():
    return create_session(ToolkitConfig("java", JAVA_PROJECT, analysis_level=AnalysisLevel.CALL_GRAPH))


@pytest.fixture(scope="session")
def python_session():
    return create_session(ToolkitConfig("python", PYTHON_PROJECT, analysis_level=AnalysisLevel.CALL_GRAPH))


@pytest.fixture(scope="session")
def sessions(java_session, python_session):
    return {"java": java_session, "python": python_session}


# -- acceptance reporting ---------------------------------------------------

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_criteria: dict[int, bool] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m or "test_acceptance" not in report.nodeid:
        return
    n = int(m.group(1))
    ok = not report.failed
    _criteria[n] = _criteria.get(n, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if _criteria[n] else 'FAIL'}")
