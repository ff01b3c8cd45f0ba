"""Dynamical Lie algebra closure and structured / random generator truncation.

The closure works on exact Pauli-sum operators: brackets of string
combinations stay string combinations with symbolically tracked phases, and
Hilbert-Schmidt inner products reduce to coefficient arithmetic.  Rank
decisions near the tolerance boundary therefore do not inherit dense
floating-point noise.

Basis elements are skew-Hermitian and HS-orthonormal.  Each carries a bracket
depth: 0 for the orthonormalized generator span, and 1 + max(parent depths)
for elements admitted from commutators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm as dense_expm

from .pauli import PauliSum
from .circuits import CircuitSpec, ParamSlot, FixedGate, TangentFrame
from .util import rng_from


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------


@dataclass
class LieBasis:
    """HS-orthonormal skew-Hermitian basis with closure diagnostics.

    closure_defect is the largest HS norm of any pairwise bracket's component
    outside the span (0 means the span is a genuine subalgebra).
    adjoint_proxy is the largest pairwise bracket HS norm, a cheap stand-in
    for the adjoint spectral radius of the selection.
    """

    dim_hilbert: int
    elements: list[PauliSum]
    depth_tags: list[int]
    closure_defect: float
    adjoint_proxy: float
    converged: bool = True

    @property
    def dim(self) -> int:
        return len(self.elements)

    @property
    def n_qubits(self) -> int:
        return int(np.log2(self.dim_hilbert))

    def to_json(self) -> dict:
        return {
            "dim_hilbert": self.dim_hilbert,
            "elements": [e.to_text() for e in self.elements],
            "depth_tags": list(self.depth_tags),
            "closure_defect": self.closure_defect,
            "adjoint_proxy": self.adjoint_proxy,
            "converged": self.converged,
        }


@dataclass
class TruncationReport:
    original_dim: int
    truncated_dim: int
    kept_depths: dict[int, int]
    closure_defect_before: float
    closure_defect_after: float
    span_preserved: bool

    def to_json(self) -> dict:
        return {
            "original_dim": self.original_dim,
            "truncated_dim": self.truncated_dim,
            "kept_depths": {str(k): v for k, v in sorted(self.kept_depths.items())},
            "closure_defect_before": self.closure_defect_before,
            "closure_defect_after": self.closure_defect_after,
            "span_preserved": self.span_preserved,
        }


# ---------------------------------------------------------------------------
# Exact Gram-Schmidt on Pauli sums
# ---------------------------------------------------------------------------


def _project_residual(x: PauliSum, basis: list[PauliSum]) -> PauliSum:
    """Two-pass projection of x off the span of an orthonormal basis."""
    r = x
    for _ in range(2):
        for b in basis:
            r = r - b.hs_inner(r) * b
    return r.prune()


def orthonormalize_sums(
    vectors: list[PauliSum], tol: float
) -> tuple[list[PauliSum], dict[int, float]]:
    basis: list[PauliSum] = []
    residuals: dict[int, float] = {}
    for idx, v in enumerate(vectors):
        r = _project_residual(v, basis)
        norm = r.hs_norm()
        residuals[idx] = norm
        if norm > tol:
            basis.append((1.0 / norm) * r)
    return basis, residuals


def _default_tol(generators: list[PauliSum]) -> float:
    scale = max((g.hs_norm() for g in generators), default=0.0)
    return 1e-10 * max(scale, 1e-300)


# ---------------------------------------------------------------------------
# Closure
# ---------------------------------------------------------------------------


def lie_closure(
    generators: list[PauliSum],
    max_dim: int | None = None,
    tol: float | None = None,
) -> LieBasis:
    """Bracket-closure of a skew-Hermitian generator set, breadth first.

    Starting from the orthonormalized generator span (depth 0), every pair
    (existing element, newest-layer element) is bracketed; residuals outside
    the current span with HS norm above ``tol`` join the basis at depth
    1 + max(parent depths).  Iteration stops at closure or when ``max_dim``
    is hit; hitting the cap is flagged, not an error, and the reported
    closure_defect is then the largest remaining residual.
    """
    if not generators:
        raise ValueError("need at least one generator")
    n_qubits = generators[0].n_qubits
    for g in generators:
        if not g.is_skew_hermitian():
            raise ValueError("closure generators must be skew-Hermitian")
    if tol is None:
        tol = _default_tol(generators)
    if tol <= 0:
        raise ValueError("tol must be positive")
    full_dim = 4 ** n_qubits
    if max_dim is None:
        max_dim = full_dim
    max_dim = min(max_dim, full_dim)

    basis, _ = orthonormalize_sums(generators, tol)
    depths = [0] * len(basis)
    newest = list(range(len(basis)))
    capped = False

    while newest and not capped:
        added: list[int] = []
        for j in newest:
            for i in range(len(basis)):
                if i == j:
                    continue
                if len(basis) >= max_dim:
                    capped = True
                    break
                br = basis[i].commutator(basis[j]).prune()
                r = _project_residual(br, basis)
                norm = r.hs_norm()
                if norm > tol:
                    basis.append((1.0 / norm) * r)
                    depths.append(1 + max(depths[i], depths[j]))
                    added.append(len(basis) - 1)
            if capped:
                break
        newest = added

    defect = 0.0 if not capped else _closure_defect(basis, tol)
    proxy = _adjoint_proxy(basis)
    return LieBasis(
        dim_hilbert=2 ** n_qubits,
        elements=basis,
        depth_tags=depths,
        closure_defect=defect,
        adjoint_proxy=proxy,
        converged=not capped,
    )


def _closure_defect(basis: list[PauliSum], tol: float) -> float:
    worst = 0.0
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            br = basis[i].commutator(basis[j]).prune()
            r = _project_residual(br, basis)
            worst = max(worst, r.hs_norm())
    return worst


def _adjoint_proxy(basis: list[PauliSum]) -> float:
    worst = 0.0
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            worst = max(worst, basis[i].commutator(basis[j]).hs_norm())
    return worst


# ---------------------------------------------------------------------------
# Structured truncation
# ---------------------------------------------------------------------------


def lie_trunc(
    closure: LieBasis,
    generators: list[PauliSum],
    depth_cap: int = 1,
    dim_budget: int | None = None,
) -> tuple[LieBasis, TruncationReport]:
    """Span-preserving reduction of a closure basis.

    The generator span (depth-0 elements) is always kept in full.  Remaining
    budget admits deeper-bracket elements greedily, smallest adjoint-proxy
    contribution first, where a candidate's contribution is its largest
    bracket HS norm against the already-selected set.  Depth is capped at
    ``depth_cap``.  The selection need not be bracket-closed: the residual
    closure defect is measured and reported rather than forced to zero.
    """
    tol = _default_tol(generators)
    span_basis, _ = orthonormalize_sums(generators, tol)
    span_dim = len(span_basis)
    if dim_budget is None:
        dim_budget = span_dim
    if dim_budget < span_dim:
        raise ValueError(
            f"dim_budget {dim_budget} is below the generator span dimension {span_dim}"
        )

    selected: list[PauliSum] = []
    sel_depths: list[int] = []
    for idx, el in enumerate(closure.elements):
        if closure.depth_tags[idx] == 0:
            selected.append(el)
            sel_depths.append(0)

    candidates = [
        (idx, el)
        for idx, el in enumerate(closure.elements)
        if 0 < closure.depth_tags[idx] <= depth_cap
    ]
    while candidates and len(selected) < dim_budget:
        scored = []
        for pos, (idx, el) in enumerate(candidates):
            contribution = max(
                (el.commutator(s).hs_norm() for s in selected), default=0.0
            )
            scored.append((contribution, closure.depth_tags[idx], pos))
        scored.sort()
        _, _, best_pos = scored[0]
        idx, el = candidates.pop(best_pos)
        selected.append(el)
        sel_depths.append(closure.depth_tags[idx])

    defect_after = _closure_defect(selected, tol)
    report = TruncationReport(
        original_dim=closure.dim,
        truncated_dim=len(selected),
        kept_depths=_depth_histogram(sel_depths),
        closure_defect_before=closure.closure_defect,
        closure_defect_after=defect_after,
        span_preserved=True,
    )
    trunc = LieBasis(
        dim_hilbert=closure.dim_hilbert,
        elements=selected,
        depth_tags=sel_depths,
        closure_defect=defect_after,
        adjoint_proxy=_adjoint_proxy(selected),
        converged=defect_after <= tol,
    )
    return trunc, report


def _depth_histogram(depths: list[int]) -> dict[int, int]:
    hist: dict[int, int] = {}
    for d in depths:
        hist[d] = hist.get(d, 0) + 1
    return hist


# ---------------------------------------------------------------------------
# Random truncation
# ---------------------------------------------------------------------------


def distinct_directions(generators: list[PauliSum]) -> list[PauliSum]:
    """First occurrence of each generator direction (collinear duplicates merged)."""
    kept: list[PauliSum] = []
    for g in generators:
        norm_g = g.hs_norm()
        if norm_g == 0.0:
            continue
        collinear = any(
            abs(abs(k.hs_inner(g)) - k.hs_norm() * norm_g) <= 1e-10 * k.hs_norm() * norm_g
            for k in kept
        )
        if not collinear:
            kept.append(g)
    return kept


def random_trunc(
    generators: list[PauliSum], keep: int, seed: int
) -> tuple[LieBasis, TruncationReport]:
    """Keep a uniform random subset of generator directions, ignoring structure.

    Sampling is over distinct directions, without replacement, seeded.  The
    returned basis spans only the kept directions; span_preserved is False
    whenever keep is below the full span dimension.
    """
    directions = distinct_directions(generators)
    if not 1 <= keep <= len(directions):
        raise ValueError(
            f"keep={keep} out of range for {len(directions)} distinct directions"
        )
    tol = _default_tol(generators)
    span_dim = len(orthonormalize_sums(generators, tol)[0])
    rng = rng_from(seed, "random_trunc")
    chosen = sorted(rng.choice(len(directions), size=keep, replace=False).tolist())
    kept = [directions[i] for i in chosen]

    basis, _ = orthonormalize_sums(kept, tol)
    defect = _closure_defect(basis, tol)
    report = TruncationReport(
        original_dim=span_dim,
        truncated_dim=len(basis),
        kept_depths={0: len(basis)},
        closure_defect_before=0.0,
        closure_defect_after=defect,
        span_preserved=len(basis) >= span_dim,
    )
    trunc = LieBasis(
        dim_hilbert=2 ** generators[0].n_qubits,
        elements=basis,
        depth_tags=[0] * len(basis),
        closure_defect=defect,
        adjoint_proxy=_adjoint_proxy(basis),
        converged=defect <= tol,
    )
    return trunc, report


# ---------------------------------------------------------------------------
# Truncated circuit models
# ---------------------------------------------------------------------------


def _pauli_scale_generators(basis: LieBasis) -> list[PauliSum]:
    """Hermitian generators at Pauli normalization (HS norm 2^{n/2}).

    Basis elements are HS-orthonormal, which makes a bare Pauli string carry
    coefficient 2^{-n/2}; rescaling restores unit-coefficient strings so the
    model's parameters stay angle-like and comparable across qubit counts.
    """
    root_dim = float(np.sqrt(basis.dim_hilbert))
    gens = []
    for el in basis.elements:
        h = (-1j) * el           # Hermitian counterpart of the skew element
        h = (root_dim / h.hs_norm()) * h
        gens.append(h.prune())
    return gens


def truncated_circuit(
    basis: LieBasis,
    parameterization: str = "product",
    initial_state: np.ndarray | None = None,
    family: str = "truncated",
):
    """Build the reduced model reachable from a truncated basis.

    ``product``: one rotation slot per basis element, |psi(c)> =
    prod_j exp(-i c_j H_j) |psi0>, with exact derivatives from the circuit
    machinery.  ``single_exp``: |psi(c)> = exp(sum_j c_j X_j) |psi0> with
    derivatives from the block-matrix identity
    exp([[A, E], [0, A]]) = [[e^A, De^A(E)], [0, e^A]].
    Both use the same Pauli-scale generator normalization, so they agree to
    first order in c.
    """
    if basis.dim == 0:
        raise ValueError("cannot build a model from an empty basis")
    if parameterization == "product":
        slots = [ParamSlot(h) for h in _pauli_scale_generators(basis)]
        return CircuitSpec(
            basis.n_qubits, slots, initial_state=initial_state, family=family
        )
    if parameterization == "single_exp":
        return SingleExpModel(basis, initial_state=initial_state, family=family)
    raise ValueError(f"unknown parameterization {parameterization!r}")


class SingleExpModel:
    """State family exp(sum_j c_j X_j)|psi0> over a fixed skew basis."""

    def __init__(self, basis: LieBasis, initial_state: np.ndarray | None = None,
                 family: str = "truncated_single_exp"):
        if basis.dim == 0:
            raise ValueError("cannot build a model from an empty basis")
        self.basis = basis
        self.n_qubits = basis.n_qubits
        self.dim = basis.dim_hilbert
        self.family = family
        # same Pauli-scale normalization as the product form: slot exp(-i c h)
        # with h = scale * (-i X) corresponds to exp(c * (-scale * X))
        root_dim = float(np.sqrt(self.dim))
        self.skew_dense = [
            -(root_dim / el.hs_norm()) * el.dense() for el in basis.elements
        ]
        if initial_state is None:
            initial_state = np.zeros(self.dim, dtype=complex)
            initial_state[0] = 1.0
        self.initial_state = np.asarray(initial_state, dtype=complex)

    @property
    def num_params(self) -> int:
        return len(self.skew_dense)

    def _assemble(self, c: np.ndarray) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if c.shape != (self.num_params,):
            raise ValueError("parameter vector has wrong length")
        a = np.zeros((self.dim, self.dim), dtype=complex)
        for cj, xj in zip(c, self.skew_dense):
            a = a + cj * xj
        return a

    def evolve(self, c: np.ndarray) -> np.ndarray:
        from .linalg import expm_skew

        return expm_skew(self._assemble(c)) @ self.initial_state

    def tangent_frame(self, c: np.ndarray) -> TangentFrame:
        a = self._assemble(c)
        partials = np.empty((self.dim, self.num_params), dtype=complex)
        state = None
        for j, xj in enumerate(self.skew_dense):
            block = np.zeros((2 * self.dim, 2 * self.dim), dtype=complex)
            block[: self.dim, : self.dim] = a
            block[self.dim :, self.dim :] = a
            block[: self.dim, self.dim :] = xj
            big = dense_expm(block)
            partials[:, j] = big[: self.dim, self.dim :] @ self.initial_state
            if state is None:
                state = big[: self.dim, : self.dim] @ self.initial_state
        return TangentFrame.build(state, partials)


# ---------------------------------------------------------------------------
# Circuit-level drivers
# ---------------------------------------------------------------------------


def reassign_slots(circuit: CircuitSpec, kept: list[PauliSum]) -> CircuitSpec:
    """Overwrite each trainable slot's generator round-robin from a kept set.

    Fixed gates and the parameter count are untouched; only the span of the
    generator set collapses.
    """
    if not kept:
        raise ValueError("kept generator set is empty")
    ops: list[ParamSlot | FixedGate] = []
    k = 0
    for op in circuit.ops:
        if isinstance(op, ParamSlot):
            ops.append(ParamSlot(kept[k % len(kept)]))
            k += 1
        else:
            ops.append(op)
    return CircuitSpec(
        circuit.n_qubits,
        ops,
        initial_state=circuit.initial_state,
        family="random_trunc",
        depth=circuit.depth,
    )


def apply_random_trunc(
    circuit: CircuitSpec, keep: int, seed: int
) -> tuple[CircuitSpec, LieBasis, TruncationReport]:
    """Random truncation of a circuit's generator set, keeping its layout."""
    gens = circuit.skew_generators()
    basis, report = random_trunc(gens, keep, seed)
    root_dim = float(np.sqrt(2 ** circuit.n_qubits))
    kept_h = [
        ((root_dim / ((-1j) * el).hs_norm()) * ((-1j) * el)).prune()
        for el in basis.elements
    ]
    reduced = reassign_slots(circuit, kept_h)
    return reduced, basis, report


def apply_lie_trunc(
    circuit: CircuitSpec,
    depth_cap: int = 1,
    dim_budget: int | None = None,
    max_closure_dim: int | None = None,
) -> tuple[CircuitSpec, LieBasis, TruncationReport]:
    """Closure + structured truncation + product-form model for a circuit."""
    gens = circuit.skew_generators()
    closure = lie_closure(gens, max_dim=max_closure_dim)
    trunc, report = lie_trunc(closure, gens, depth_cap=depth_cap, dim_budget=dim_budget)
    model = truncated_circuit(
        trunc, "product", initial_state=circuit.initial_state, family="lie_trunc"
    )
    return model, trunc, report
