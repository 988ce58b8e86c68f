"""Acceptance criteria at their stated tolerances and time budgets.

Each test prints one ``[PASS]`` / ``[FAIL]`` line; the same lines come from
``python3 scripts/run_acceptance.py``.
"""

import pytest

from chaplab.acceptance import CRITERIA, clear_caches


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i + 1:02d}" for i in range(len(CRITERIA))])
def test_criterion(criterion, capsys):
    # cold start: budgets include building the primitive tables
    clear_caches()
    res = criterion()
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.details
