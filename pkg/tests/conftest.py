from __future__ import annotations

from pathlib import Path

import pytest

from vardf_crawl import StopWordList
from vardf_crawl.corpus import load_corpus

FIXTURES = Path(__file__).parent / "fixtures"

_acceptance: dict[int, tuple[str, str]] = {}
_notes: list[str] = []


@pytest.fixture(scope="session")
def stoplist() -> StopWordList:
    return StopWordList.default()


@pytest.fixture(scope="session")
def six_docs(stoplist):
    return [f.parsed for f in load_corpus(FIXTURES / "six_docs", stoplist)]


@pytest.fixture(scope="session")
def ir_pages() -> dict[str, str]:
    return {p.stem: p.read_text() for p in sorted((FIXTURES / "ir_corpus").glob("*.html"))}


@pytest.fixture
def report_note():
    """Add an informational line to the acceptance summary."""
    return _notes.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        previous = _acceptance.get(number, (title, "PASS"))[1]
        _acceptance[number] = (title, status if previous == "PASS" else previous)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number, (title, status) in sorted(_acceptance.items()):
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
    for note in _notes:
        terminalreporter.write_line(f"  note: {note}")
