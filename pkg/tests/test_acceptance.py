"""Acceptance criteria, each at its stated tolerance.

Every criterion prints one PASS/FAIL line straight to the terminal, past
pytest's capture. The whole module takes several minutes on one core.
"""

import pytest

from holevolab import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, capsys):
    result = acceptance.CRITERIA[number]()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
