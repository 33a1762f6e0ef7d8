"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

The lines are also collected and printed in the terminal summary, so they
show up even without ``-s``.
"""

import pytest

from acceptance_checks import CRITERIA, line

RESULTS = []


@pytest.mark.parametrize("num,name,fn", CRITERIA, ids=[f"criterion_{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(num, name, fn):
    ok, detail = fn()
    text = line(num, name, ok, detail)
    RESULTS.append(text)
    print(text)
    assert ok, text
