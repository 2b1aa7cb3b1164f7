"""Shared fixtures. The acceptance-line machinery collects one verdict line
per acceptance test and replays them after the run summary, because pytest
swallows stdout of passing tests."""

import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record and print a single '[pass]/[FAIL] name: value (target ...)' line."""

    def record(name, passed, value, target):
        word = "pass" if passed else "FAIL"
        line = f"[{word}] {name}: {value} (target {target})"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance checks")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
