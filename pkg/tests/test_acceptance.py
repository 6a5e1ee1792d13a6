"""Runs every acceptance criterion once, at its stated tolerance and time limit.

Each test prints a single pass/fail line for its criterion.
"""
import pytest

from xmdl import acceptance

RESULTS = {}


def _cid(fn):
    return fn.__name__.split("_", 1)[1]


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=[f"criterion_{_cid(f)}" for f in acceptance.CRITERIA])
def test_criterion(criterion, capsys):
    res = criterion()
    RESULTS[res.cid] = res
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed is True, res.line() + f" details={res.details}"


def test_summary(capsys):
    with capsys.disabled():
        print()
        for cid, res in RESULTS.items():
            print(f"  {cid:>2}: {res.status}")
    assert all(r.passed for r in RESULTS.values())
