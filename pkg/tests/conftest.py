import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import pytest

CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def record_criterion(request):
    results = request.config.stash.setdefault(CRITERIA, {})

    def record(n, ok):
        results[n] = ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(CRITERIA, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(f"CRITERION {n}: {'PASS' if results[n] else 'FAIL'}")
