"""Acceptance gate: one test per criterion, printed as one pass/fail line each.

Criteria 3 and 4 share the density-grid computation (module-scoped fixture);
it dominates the suite's runtime.  Run with `pytest -s tests/test_acceptance.py`
to see the per-criterion lines as they complete.
"""

import pytest

from aircomp import acceptance

N_ITER = 10_000


@pytest.fixture(scope="module")
def fig2_grid():
    return acceptance.compute_fig2_grid(n_iter=N_ITER)


def report(result):
    status = "PASS" if result.passed else "FAIL"
    print(f"[{status}] criterion {result.number}: {result.name}\n"
          f"        {result.detail}")
    assert result.passed, f"criterion {result.number}: {result.detail}"


def test_criterion_1_special_functions():
    report(acceptance.criterion_1())


def test_criterion_2_campbell_oracle():
    report(acceptance.criterion_2(n_iter=N_ITER))


def test_criterion_3_theorem_adjudication(fig2_grid):
    report(acceptance.criterion_3(fig2_grid))


def test_criterion_4_mse_decreasing_in_density(fig2_grid):
    report(acceptance.criterion_4(fig2_grid))


def test_criterion_5_optimal_access_radius():
    report(acceptance.criterion_5())


def test_criterion_6_eta_optimizer_vs_dense_grid():
    report(acceptance.criterion_6())


def test_criterion_7_per_realization_stationarity():
    report(acceptance.criterion_7())


def test_criterion_8_determinism():
    report(acceptance.criterion_8())
