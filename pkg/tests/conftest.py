import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_LINES = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_LINES] = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion; missing verdicts count as failures."""
    lines = request.config.stash[_LINES]
    seen = []

    def report(number: int, ok: bool, detail: str):
        seen.append(number)
        lines[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"

    yield report
    if not seen:
        lines[len(lines) + 1000] = f"{request.node.name}: FAIL  (error before a verdict was recorded)"


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[_LINES]
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
