import itertools

import pytest

from autostruct.presentations import make_presentation


@pytest.fixture(scope="session")
def fp3():
    return make_presentation("fp", 3)


@pytest.fixture(scope="session")
def gp3():
    return make_presentation("gp", 3)


@pytest.fixture(scope="session")
def hp3():
    return make_presentation("hp", 3)


def digit_strings(p, max_len):
    """Every string over 0..p-1 of length <= max_len, shortest first."""
    digits = "0123456789"[:p]
    for n in range(max_len + 1):
        for t in itertools.product(digits, repeat=n):
            yield "".join(t)


def string_tuples(p, k, max_len):
    strings = list(digit_strings(p, max_len))
    return itertools.product(strings, repeat=k)


_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion; printed at the end of the run."""
    def record(number, title, ok, detail=""):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
