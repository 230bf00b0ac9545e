import time
from contextlib import contextmanager

import pytest

_RESULTS = []


class Criterion:
    def __init__(self, number, title, budget_s):
        self.number, self.title, self.budget_s = number, title, budget_s
        self.notes = []

    def note(self, text):
        self.notes.append(text)


@contextmanager
def _criterion(number, title, budget_s=None):
    c = Criterion(number, title, budget_s)
    start = time.perf_counter()
    ok = False
    try:
        yield c
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        if ok and budget_s is not None and elapsed > budget_s:
            ok = False
            c.note(f"over the {budget_s:g}s budget")
        _RESULTS.append((number, title, ok, elapsed, c.notes))
    if not ok:
        pytest.fail(f"criterion {number} exceeded its {budget_s:g}s budget ({elapsed:.1f}s)")


@pytest.fixture
def criterion():
    return _criterion


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, elapsed, notes in sorted(_RESULTS):
        extra = f" [{'; '.join(notes)}]" if notes else ""
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'}  {number}. {title} ({elapsed:.2f}s){extra}")
