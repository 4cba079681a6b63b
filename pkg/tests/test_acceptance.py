"""Acceptance criteria at their stated tolerances and runtime budgets.

Every criterion prints one PASS/FAIL line; the lines are repeated in the
terminal summary so they show up without ``-s``.
"""

import pytest

from torsionlab import acceptance

RESULTS: dict[str, acceptance.AcceptanceResult] = {}


@pytest.mark.parametrize("name", list(acceptance.CHECKS))
def test_criterion(name):
    res = acceptance.CHECKS[name]()
    RESULTS[name] = res
    print(res.line())
    assert res.passed, res.summary
