"""Verification machinery: oracle sanity, mutation sensitivity, report shape."""

import numpy as np
import pytest

from liepqc.circuits import CircuitSpec, ParamSlot, TangentFrame
from liepqc.geometry import SamplingSpec, fs_metric_at
from liepqc.pauli import PauliSum, PauliString
from liepqc.sweep import SweepConfig
from liepqc.verify import brute_force_closure_dim, verify_suite
from liepqc.lie import lie_closure


def test_oracle_known_algebras():
    x = PauliString(1, "X").dense()
    z = PauliString(1, "Z").dense()
    assert brute_force_closure_dim([1j * x]) == 1
    assert brute_force_closure_dim([1j * x, 1j * z]) == 3   # su(2)
    # {X1, Z1, X2, Z2, Z1Z2} generates su(4)
    gens = [1j * PauliString(2, w).dense() for w in ("XI", "ZI", "IX", "IZ", "ZZ")]
    assert brute_force_closure_dim(gens) == 15


def test_oracle_agrees_with_closure_on_combination_generators():
    rng = np.random.default_rng(51)
    for _ in range(5):
        terms_a = {"XI": float(rng.normal()), "ZZ": float(rng.normal())}
        terms_b = {"IY": float(rng.normal()), "YX": float(rng.normal())}
        a = 1j * PauliSum(2, terms_a)
        b = 1j * PauliSum(2, terms_b)
        assert lie_closure([a, b]).dim == brute_force_closure_dim([a.dense(), b.dense()])


def test_mutation_dropping_phase_projection_is_detected(monkeypatch):
    """Killing the global-phase projection must flip a frozen metric value."""

    def unprojected_build(cls, state, partials):
        return TangentFrame(state=state, partials=partials, projected=partials)

    monkeypatch.setattr(TangentFrame, "build", classmethod(unprojected_build))
    # stabilizer direction: correct metric is exactly 0, mutated one is 1
    c = CircuitSpec(1, [ParamSlot(PauliSum.from_letters(1, "Z"))])
    mutated = fs_metric_at(c, np.array([0.7]))
    assert mutated[0, 0] == pytest.approx(1.0, abs=1e-12)   # bug visible


def test_verify_suite_reduced_config():
    cfg = SweepConfig(qubit_range=[2, 3])
    cfg.sampling = SamplingSpec(n_samples=10, seed=0)
    report = verify_suite(cfg, include_invariants=False)
    assert {c["name"] for c in report["checks"]} == {
        "span_rank_bound",
        "random_trunc_collapse",
        "span_preservation_rank_match",
        "scaling_law_signature",
        "gradient_exactness",
        "metric_consistency",
        "closure_oracle_equivalence",
        "perturbation_bound",
        "vqe_sanity",
        "determinism_and_budget",
    }
    for chk in report["checks"]:
        assert isinstance(chk["margin"], float)
        assert chk["detail"]
    assert report["passed"] is True
