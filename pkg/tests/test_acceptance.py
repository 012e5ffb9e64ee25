"""Acceptance ladder: one pass/fail line per criterion.

Lines are printed as each criterion runs (visible with -s) and repeated in an
"acceptance" section at the end of the pytest summary.
"""
import pytest

from spikelab import acceptance

FAST = [1, 2, 3, 4, 5, 6, 7, 8, 9]
LINES = {}


def _report(res):
    line = acceptance.format_table([res]).splitlines()[1]
    LINES[res.cid] = line
    print(f"\nACCEPTANCE {line}")
    return res


@pytest.mark.parametrize("cid", FAST)
def test_criterion(cid):
    res = _report(acceptance.CRITERIA[cid]())
    assert res.passed, res.detail


@pytest.mark.slow
def test_criterion_10_simulation_suite():
    res = _report(acceptance.CRITERIA[10]())
    assert res.passed, res.detail
