import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sky.grounder import ground_program  # noqa: E402
from sky.harness import shipped_corpus  # noqa: E402
from sky.parser import parse_program  # noqa: E402

CORPUS = shipped_corpus()

_criteria: list[tuple[str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria.append(("PASS" if report.passed else "FAIL", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for status, name in _criteria:
        terminalreporter.write_line(f"[{status}] {name}")


def ground(text: str):
    return ground_program(parse_program(text))


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture
def triangle():
    return ground((CORPUS / "triangle_coloring.sky").read_text())
