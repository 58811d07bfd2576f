"""Acceptance criteria A1-A5 at their stated tolerances.

Each criterion is one test; its sub-checks are asserted together and a
one-line verdict per criterion is printed in the pytest terminal summary
(see conftest.py). Run directly with ``python3 tests/test_acceptance.py``
for the same lines without pytest.
"""

import time

import pytest

from lighttail import checks

VERDICTS = {}

CRITERIA = {
    "A1": ("oracle matches Erlang closed forms within 1e-8", lambda: checks.check_oracle_exactness()),
    "A2": ("Gamma pair: error <= 6/t^2, slopes -2 and -1", checks.check_gamma_pair),
    "A3": ("Weibull deficit ratio and -1/2 slope", lambda: checks.check_weibull_self_convolution()),
    "A4": ("branch suite: second order closer, slope gain >= 0.3", lambda: checks.check_branch_suite()),
    "A5": ("property suite", checks.check_properties),
}


def run_criterion(key):
    t0 = time.perf_counter()
    rows = CRITERIA[key][1]()
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in rows)
    failed = [r.name for r in rows if not r.passed]
    tail = "" if ok else f" [failed: {', '.join(failed)}]"
    line = f"{key} {'PASS' if ok else 'FAIL'}  {CRITERIA[key][0]} ({elapsed:.2f}s){tail}"
    VERDICTS[key] = line
    return rows, elapsed


@pytest.mark.parametrize("key, budget", [("A1", 1.0), ("A2", 1.0), ("A3", 60.0), ("A4", 60.0), ("A5", 60.0)])
def test_criterion(key, budget):
    rows, elapsed = run_criterion(key)
    print(VERDICTS[key])
    for r in rows:
        print(f"  {'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    assert elapsed < budget
    assert all(r.passed for r in rows), [f"{r.name}: {r.detail}" for r in rows if not r.passed]


if __name__ == "__main__":
    for k in CRITERIA:
        run_criterion(k)
        print(VERDICTS[k])
