import pytest

from discatom.fixtures import load_fixture
from discatom.free import build_free_algebra

# (fixture, generators, order) configurations that carry strict pairs
CONFIGS = [
    ("B2", 1, "boolean"),
    ("B2", 2, "boolean"),
    ("D3min", 1, "linear"),
    ("D3min", 1, "collapsed"),
]
ALL_FIXTURES = ["B2", "D3", "D3min", "S2"]

_free_cache = {}


def free(name, m):
    """Session-wide cache of free algebras; they are immutable."""
    key = (name, m)
    if key not in _free_cache:
        _free_cache[key] = build_free_algebra(load_fixture(name).presentation, m)
    return _free_cache[key]


@pytest.fixture
def b2():
    return load_fixture("B2")


@pytest.fixture
def d3min():
    return load_fixture("D3min")


@pytest.fixture
def s2():
    return load_fixture("S2")


ACCEPTANCE_LINES = []


def record_acceptance(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
