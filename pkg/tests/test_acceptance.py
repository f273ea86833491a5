"""Acceptance gate: one test per corpus criterion, each printing a single
pass/fail verdict line.

Run with `pytest -s tests/test_acceptance.py` to see the verdict lines
inline; without -s they still appear in captured output on failure.
"""

import pytest

from funcjohn.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA),
                         ids=[f"criterion_{n}" for n in sorted(CRITERIA)])
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print(result.verdict_line())
    assert result.passed, result.verdict_line()
