"""Parameterized circuits, statevector evolution, and exact parameter derivatives.

A circuit is an ordered list of operations applied left to right onto the
initial state: the first op acts first.  Parameterized slots implement
``exp(-i * theta_k * H_k)`` for a Hermitian generator ``H_k`` (no half-angle
factor); fixed gates are arbitrary unitaries such as entangler layers.

Derivatives use the exact product rule: ``d_k psi`` inserts ``-i H_k`` at slot
k between the prefix and suffix of the gate product.  A single forward pass
caches intermediate states and one backward pass accumulates suffix
unitaries, so the whole tangent frame costs O(#ops) matrix products plus one
generator application per parameter.  The simplified form ``-i H_k U`` that
is sometimes quoted for commuting generators is deliberately not used: the
metric and gradients here must match finite differences for arbitrary
non-commuting slot sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliSum
from .linalg import hermitian_eig, is_hermitian

NORM_TOL = 1e-10
NONDEGENERACY_TOL = 1e-10


# ---------------------------------------------------------------------------
# Circuit operations
# ---------------------------------------------------------------------------


class ParamSlot:
    """One trainable rotation exp(-i theta H) with Hermitian generator H."""

    def __init__(self, generator: PauliSum | np.ndarray, label: str | None = None):
        if isinstance(generator, PauliSum):
            if not generator.is_hermitian():
                raise ValueError("slot generator must be Hermitian")
            self.generator = generator
            self.n_qubits = generator.n_qubits
        else:
            generator = np.asarray(generator, dtype=complex)
            if not is_hermitian(generator):
                raise ValueError("slot generator must be Hermitian")
            self.generator = generator
            self.n_qubits = int(np.log2(generator.shape[0]))
        self.label = label
        self._dense_h: np.ndarray | None = None
        self._string_cache: tuple[float, np.ndarray] | None = None
        self._eig_cache: tuple[np.ndarray, np.ndarray] | None = None
        self._prepare()

    def _prepare(self) -> None:
        if isinstance(self.generator, PauliSum):
            single = self.generator.single_string()
            if single is not None and abs(single.coefficient.imag) == 0.0:
                p = PauliSum.from_letters(self.n_qubits, single.letters).dense()
                self._string_cache = (float(single.coefficient.real), p)
                return
        h = self.dense_generator()
        self._eig_cache = hermitian_eig(h)

    def dense_generator(self) -> np.ndarray:
        if self._dense_h is None:
            if isinstance(self.generator, PauliSum):
                self._dense_h = self.generator.dense()
            else:
                self._dense_h = self.generator
        return self._dense_h

    def matrix(self, theta: float) -> np.ndarray:
        """Dense exp(-i theta H)."""
        if self._string_cache is not None:
            c, p = self._string_cache
            dim = p.shape[0]
            return np.cos(c * theta) * np.eye(dim) - 1j * np.sin(c * theta) * p
        vals, vecs = self._eig_cache
        return (vecs * np.exp(-1j * theta * vals)) @ vecs.conj().T

    def apply(self, theta: float, state: np.ndarray) -> np.ndarray:
        if self._string_cache is not None:
            c, p = self._string_cache
            return np.cos(c * theta) * state - 1j * np.sin(c * theta) * (p @ state)
        vals, vecs = self._eig_cache
        return vecs @ (np.exp(-1j * theta * vals) * (vecs.conj().T @ state))

    def apply_generator(self, state: np.ndarray) -> np.ndarray:
        """-i H |state>."""
        if self._string_cache is not None:
            c, p = self._string_cache
            return -1j * c * (p @ state)
        return -1j * (self.dense_generator() @ state)

    def generator_text(self) -> str:
        if isinstance(self.generator, PauliSum):
            single = self.generator.single_string()
            if single is not None and single.coefficient == 1.0:
                return single.letters
            return self.generator.to_text()
        return "<dense>"


class FixedGate:
    """A non-trainable unitary inserted between slots."""

    def __init__(self, matrix: np.ndarray, label: str = "fixed"):
        matrix = np.asarray(matrix, dtype=complex)
        dim = matrix.shape[0]
        err = np.max(np.abs(matrix.conj().T @ matrix - np.eye(dim)))
        if err > NORM_TOL:
            raise ValueError(f"fixed gate is not unitary (deviation {err:.2e})")
        self.matrix_value = matrix
        self.label = label
        self.n_qubits = int(np.log2(dim))

    def matrix(self, theta: float | None = None) -> np.ndarray:
        return self.matrix_value

    def apply(self, state: np.ndarray) -> np.ndarray:
        return self.matrix_value @ state


@dataclass
class TangentFrame:
    """State plus all parameter derivatives at one parameter point.

    ``projected`` removes the global-phase component of each column:
    <psi | projected_k> = 0, which is the tangent space of the projective
    state manifold.
    """

    state: np.ndarray
    partials: np.ndarray         # dim x L, column k = d_k psi
    projected: np.ndarray        # dim x L, phase direction removed

    @classmethod
    def build(cls, state: np.ndarray, partials: np.ndarray) -> "TangentFrame":
        overlaps = state.conj() @ partials
        projected = partials - np.outer(state, overlaps)
        return cls(state=state, partials=partials, projected=projected)


# ---------------------------------------------------------------------------
# CircuitSpec
# ---------------------------------------------------------------------------


class CircuitSpec:
    """Ordered gate sequence with trainable Pauli-generator slots.

    Treat instances as immutable after construction; evolution and derivative
    evaluation are pure and safe to call concurrently.
    """

    def __init__(
        self,
        n_qubits: int,
        ops: list[ParamSlot | FixedGate],
        initial_state: np.ndarray | None = None,
        family: str = "custom",
        depth: int = 0,
    ):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = n_qubits
        self.dim = 2 ** n_qubits
        for op in ops:
            if op.n_qubits != n_qubits:
                raise ValueError("op qubit count does not match circuit")
        self.ops = list(ops)
        if initial_state is None:
            initial_state = np.zeros(self.dim, dtype=complex)
            initial_state[0] = 1.0
        initial_state = np.asarray(initial_state, dtype=complex)
        if initial_state.shape != (self.dim,):
            raise ValueError("initial state has wrong dimension")
        if abs(np.linalg.norm(initial_state) - 1.0) > NORM_TOL:
            raise ValueError("initial state is not normalized")
        self.initial_state = initial_state
        self.family = family
        self.depth = depth
        self.param_slots = [op for op in self.ops if isinstance(op, ParamSlot)]

    @property
    def num_params(self) -> int:
        return len(self.param_slots)

    @property
    def param_domain(self) -> tuple[float, float]:
        """Box bounds applied to every parameter coordinate."""
        return (0.0, 2.0 * np.pi)

    def generators(self) -> list[PauliSum | np.ndarray]:
        return [slot.generator for slot in self.param_slots]

    def skew_generators(self) -> list[PauliSum]:
        """i*H_k for all slots, as exact Pauli sums (dense slots are expanded)."""
        out = []
        for slot in self.param_slots:
            if isinstance(slot.generator, PauliSum):
                out.append(1j * slot.generator)
            else:
                out.append(1j * dense_to_pauli_sum(slot.generator, self.n_qubits))
        return out

    def _check_theta(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.num_params,):
            raise ValueError(
                f"theta has length {theta.shape}, circuit expects {self.num_params}"
            )
        return theta

    def evolve(self, theta: np.ndarray) -> np.ndarray:
        theta = self._check_theta(theta)
        state = self.initial_state
        k = 0
        for op in self.ops:
            if isinstance(op, ParamSlot):
                state = op.apply(theta[k], state)
                k += 1
            else:
                state = op.apply(state)
        return state

    def tangent_frame(self, theta: np.ndarray) -> TangentFrame:
        theta = self._check_theta(theta)
        n_ops = len(self.ops)

        # forward pass: state after each op
        states = np.empty((n_ops + 1, self.dim), dtype=complex)
        states[0] = self.initial_state
        k = 0
        param_positions: list[tuple[int, int]] = []   # (op index, param index)
        for i, op in enumerate(self.ops):
            if isinstance(op, ParamSlot):
                states[i + 1] = op.apply(theta[k], states[i])
                param_positions.append((i, k))
                k += 1
            else:
                states[i + 1] = op.apply(states[i])

        # backward pass: suffix unitary strictly after each op
        suffixes: list[np.ndarray | None] = [None] * n_ops
        acc = np.eye(self.dim, dtype=complex)
        k = self.num_params
        for i in range(n_ops - 1, -1, -1):
            suffixes[i] = acc
            op = self.ops[i]
            if isinstance(op, ParamSlot):
                k -= 1
                acc = acc @ op.matrix(theta[k])
            else:
                acc = acc @ op.matrix()

        partials = np.empty((self.dim, self.num_params), dtype=complex)
        for i, k in param_positions:
            slot = self.ops[i]
            partials[:, k] = suffixes[i] @ slot.apply_generator(states[i + 1])
        return TangentFrame.build(states[n_ops], partials)


# ---------------------------------------------------------------------------
# Module-level operation surface
# ---------------------------------------------------------------------------


def evolve(circuit, theta: np.ndarray) -> np.ndarray:
    return circuit.evolve(theta)


def partials(circuit, theta: np.ndarray) -> TangentFrame:
    return circuit.tangent_frame(theta)


def check_nondegeneracy(circuit: CircuitSpec) -> tuple[bool, int | None]:
    """First slot whose generator moves the initial state off itself.

    Returns (True, k) for the first generator with a nonzero component of
    H_k|psi0> orthogonal to |psi0>, else (False, None).
    """
    psi0 = circuit.initial_state
    for k, slot in enumerate(circuit.param_slots):
        moved = slot.dense_generator() @ psi0
        residual = moved - (psi0.conj() @ moved) * psi0
        if np.linalg.norm(residual) > NONDEGENERACY_TOL:
            return True, k
    return False, None


def polynomial_depth_ok(circuit: CircuitSpec, coeff: float = 4.0, power: int = 2) -> bool:
    """Check the parameter count stays within coeff * n^power."""
    return circuit.num_params <= coeff * circuit.n_qubits ** power


# ---------------------------------------------------------------------------
# Ansatz construction
# ---------------------------------------------------------------------------


def cz_ring_matrix(n_qubits: int) -> np.ndarray:
    """Diagonal unitary applying CZ on every ring edge (chain closure only for n >= 3)."""
    dim = 2 ** n_qubits
    idx = np.arange(dim)
    bits = (idx[:, None] >> (n_qubits - 1 - np.arange(n_qubits))) & 1
    edges = [(i, i + 1) for i in range(n_qubits - 1)]
    if n_qubits >= 3:
        edges.append((n_qubits - 1, 0))
    sign = np.ones(dim)
    for a, b in edges:
        sign *= np.where((bits[:, a] == 1) & (bits[:, b] == 1), -1.0, 1.0)
    return np.diag(sign.astype(complex))


def _single_letter(n_qubits: int, qubit: int, letter: str) -> PauliSum:
    letters = "".join(letter if q == qubit else "I" for q in range(n_qubits))
    return PauliSum.from_letters(n_qubits, letters)


def build_ansatz(family: str, n_qubits: int, depth: int) -> CircuitSpec:
    """Construct a named ansatz family.

    ``full_hea``: per layer, one R_Y slot and one R_Z slot per qubit followed
    by a fixed CZ ring, repeated ``depth`` times (L = 2 * n * depth).  The
    derived families apply the default structured / random reduction on top
    of ``full_hea``.
    """
    if n_qubits < 1 or depth < 1:
        raise ValueError("n_qubits and depth must be >= 1")
    if family == "full_hea":
        ops: list[ParamSlot | FixedGate] = []
        for _ in range(depth):
            for q in range(n_qubits):
                ops.append(ParamSlot(_single_letter(n_qubits, q, "Y"), label=f"RY{q}"))
            for q in range(n_qubits):
                ops.append(ParamSlot(_single_letter(n_qubits, q, "Z"), label=f"RZ{q}"))
            if n_qubits >= 2:
                ops.append(FixedGate(cz_ring_matrix(n_qubits), label="cz_ring"))
        return CircuitSpec(n_qubits, ops, family="full_hea", depth=depth)
    if family in ("random_trunc", "lie_trunc"):
        from . import lie  # deferred: lie builds on top of this module

        base = build_ansatz("full_hea", n_qubits, depth)
        if family == "random_trunc":
            circuit, _, _ = lie.apply_random_trunc(base, keep=2, seed=0)
        else:
            circuit, _, _ = lie.apply_lie_trunc(base)
        return circuit
    raise ValueError(f"unknown ansatz family {family!r}")


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def dense_to_pauli_sum(matrix: np.ndarray, n_qubits: int) -> PauliSum:
    """Expand a dense operator exactly in the Pauli-string basis."""
    from .pauli import all_strings, PauliString

    dim = 2 ** n_qubits
    terms: dict[str, complex] = {}
    for letters in all_strings(n_qubits):
        p = PauliString(n_qubits, letters).dense()
        coeff = complex(np.trace(p.conj().T @ matrix)) / dim
        if abs(coeff) > 1e-14:
            terms[letters] = coeff
    return PauliSum(n_qubits, terms)


def circuit_to_json(circuit: CircuitSpec) -> dict:
    from .util import complex_to_json

    slots = []
    for op in circuit.ops:
        if isinstance(op, ParamSlot):
            if isinstance(op.generator, PauliSum):
                slots.append({"kind": "param", "pauli": op.generator_text()})
            else:
                slots.append({"kind": "param", "matrix": complex_to_json(op.generator)})
        else:
            slots.append(
                {"kind": "fixed", "matrix": complex_to_json(op.matrix_value), "label": op.label}
            )
    return {
        "n_qubits": circuit.n_qubits,
        "slots": slots,
        "initial_state": complex_to_json(circuit.initial_state),
        "family": circuit.family,
        "depth": circuit.depth,
    }


def circuit_from_json(data: dict) -> CircuitSpec:
    from .util import complex_from_json

    n = int(data["n_qubits"])
    ops: list[ParamSlot | FixedGate] = []
    for slot in data["slots"]:
        kind = slot.get("kind")
        if kind == "param":
            if "pauli" in slot:
                text = slot["pauli"]
                if "*" in text:
                    gen = PauliSum.from_text(n, text)
                else:
                    gen = PauliSum.from_letters(n, text)
                ops.append(ParamSlot(gen))
            else:
                ops.append(ParamSlot(complex_from_json(slot["matrix"])))
        elif kind == "fixed":
            ops.append(FixedGate(complex_from_json(slot["matrix"]), slot.get("label", "fixed")))
        else:
            raise ValueError(f"unknown slot kind {kind!r}")
    initial = complex_from_json(data["initial_state"]) if "initial_state" in data else None
    return CircuitSpec(
        n,
        ops,
        initial_state=initial,
        family=data.get("family", "custom"),
        depth=int(data.get("depth", 0)),
    )
