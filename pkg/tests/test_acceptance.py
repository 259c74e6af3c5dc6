"""Acceptance criteria, one test each, run at their stated tolerances."""
import pytest

from gridflux import acceptance


@pytest.mark.parametrize("check", acceptance.CRITERIA, ids=lambda c: c.__name__)
def test_criterion(check):
    result = check()
    print(result.line())
    assert result.passed, result.line()
