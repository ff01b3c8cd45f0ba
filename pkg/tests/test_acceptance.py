"""Acceptance gate: every shipped criterion at its stated tolerance.

Each test prints one PASS/FAIL line with the measured margin so the suite
doubles as a machine-readable report (`pytest -v -s tests/test_acceptance.py`).
The same checks back the `liepqc verify` command.
"""

import time

import pytest

from liepqc.sweep import SweepConfig, run_sweep
from liepqc.verify import (
    check_closure_oracle,
    check_determinism_and_budget,
    check_gradient_exactness,
    check_metric_consistency,
    check_perturbation_bound,
    check_random_collapse,
    check_scaling_signature,
    check_span_preservation,
    check_span_rank_bound,
    check_vqe_sanity,
)


def report(number: int, result: dict) -> None:
    status = "PASS" if result["passed"] else "FAIL"
    print(f"[acceptance {number}] {status} {result['name']}: {result['detail']}")


@pytest.fixture(scope="module")
def default_records():
    records, errors = run_sweep(SweepConfig(), write_files=False)
    assert not errors
    return records


def test_criterion_1_span_rank_bound():
    start = time.time()
    result = check_span_rank_bound(n_circuits=100)
    elapsed = time.time() - start
    report(1, result)
    assert result["passed"]
    assert elapsed < 60.0, f"span-rank check took {elapsed:.1f}s (budget 60s)"


def test_criterion_2_random_trunc_collapse():
    start = time.time()
    result = check_random_collapse()
    elapsed = time.time() - start
    report(2, result)
    assert result["passed"]
    assert elapsed < 120.0, f"collapse check took {elapsed:.1f}s (budget 2min)"


def test_criterion_3_span_preservation():
    result = check_span_preservation()
    report(3, result)
    assert result["passed"]


def test_criterion_4_scaling_law_signature(default_records):
    result = check_scaling_signature(records=default_records)
    report(4, result)
    assert result["passed"]


def test_criterion_5_gradient_exactness():
    result = check_gradient_exactness(n_cases=50)
    report(5, result)
    assert result["passed"]


def test_criterion_6_metric_consistency():
    result = check_metric_consistency()
    report(6, result)
    assert result["passed"]


def test_criterion_7_closure_oracle_equivalence():
    result = check_closure_oracle(n_sets=30)
    report(7, result)
    assert result["passed"]


def test_criterion_8_perturbation_bound():
    start = time.time()
    result = check_perturbation_bound(n_trials=1000)
    elapsed = time.time() - start
    report(8, result)
    assert result["passed"]
    assert elapsed < 30.0, f"perturbation check took {elapsed:.1f}s (budget 30s)"


def test_criterion_9_vqe_sanity():
    result = check_vqe_sanity()
    report(9, result)
    assert result["passed"]


def test_criterion_10_determinism_and_budget():
    result = check_determinism_and_budget()
    report(10, result)
    assert result["passed"]
