"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line; the lines are also
collected and repeated in the terminal summary (see ``conftest.py``). Run
``python3 tests/test_acceptance.py`` for the lines alone.
"""

import pytest

from hypocoercive import acceptance

pytestmark = pytest.mark.acceptance

@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda fn: fn.__name__.removeprefix("criterion_"))
def test_criterion(criterion, record_line):
    result = criterion()
    record_line(result.line())
    print(result.line())
    assert result.passed, result.line()


if __name__ == "__main__":
    for r in acceptance.run_all():
        print(r.line())
