"""Acceptance gate: every criterion at its stated tolerance, one line each.

Run with ``pytest tests/test_acceptance.py -v -s`` (or via the command line:
``circdirac verify --suite all --seed 7``).  Exact criteria compare an
observed error against a fixed tolerance; statistical criteria compare a
test statistic against its 0.001-level threshold; trend criteria require a
strict decrease.
"""

import pytest

from circdirac import verify

ACCEPTANCE_SEED = 7

ORDER = [
    "lattice-closed-form",
    "spectral-lift",
    "roundtrip",
    "weight-duality",
    "trace-hs-closed-form",
    "kn-marginals",
    "palm-coefficient-law",
    "gamma-weight-limit",
    "spectral-averaging",
    "circular-jacobi",
    "sine-intensity",
    "palm-pins-zero",
    "biasing-trend",
    "transform-invariance",
]


@pytest.mark.parametrize("name", ORDER)
def test_criterion(name):
    checks = verify.CRITERIA[name](ACCEPTANCE_SEED)
    assert checks, "criterion produced no checks"
    ok = all(report.passed for _, report in checks)
    print(f"{'PASS' if ok else 'FAIL'} {name}")
    for label, report in checks:
        flag = "pass" if report.passed else "FAIL"
        print(f"    [{flag}] {label}: statistic {report.statistic:.6g} "
              f"vs threshold {report.threshold:.6g} "
              f"(n={report.sample_size})")
    assert ok


def test_every_criterion_is_in_a_suite():
    assert set(ORDER) == set(verify.CRITERIA)
    assert set(verify.SUITES["all"]) == set(verify.CRITERIA)
