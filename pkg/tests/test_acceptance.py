"""The fifteen acceptance criteria, one pass/fail line each.

Run directly (python tests/test_acceptance.py) for the summary alone.
"""

import sys

import pytest

from weilform.verify import CRITERIA, run_criterion


def _line(k, report):
    flagged = sum(c.status == "flagged" for c in report.checks)
    extra = f" ({flagged} flagged)" if flagged else ""
    return f"criterion {k:2d} {CRITERIA[k][0]}: {'PASS' if report.passed else 'FAIL'}{extra}"


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    report = run_criterion(k)
    with capsys.disabled():
        print("\n" + _line(k, report))
    failed = [c.id for c in report.checks if c.status == "fail"]
    assert report.passed, f"failing checks: {failed}"


def main() -> int:
    code = 0
    for k in sorted(CRITERIA):
        report = run_criterion(k)
        print(_line(k, report), flush=True)
        code |= report.exit_code
    return code


if __name__ == "__main__":
    sys.exit(main())
