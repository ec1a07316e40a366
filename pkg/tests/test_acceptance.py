"""Numbered acceptance criteria; each test prints one PASS/FAIL line."""

import pytest

from apmm.acceptance import CRITERIA, format_result, run_criteria

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    (result,) = run_criteria([number])
    line = format_result(result)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert result.passed, line
