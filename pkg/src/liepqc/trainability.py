"""Losses, exact gradients, SVD gradient decomposition, and variance statistics.

Two loss families are provided: the expectation of a Hermitian observable
(default: Z on the first qubit) and the transverse-field Ising energy
H = -J * sum Z_i Z_{i+1} - h * sum X_i on an open chain, the variational
eigensolver target.

For an expectation loss the gradient is grad_k = 2 Re <d_k psi| O |psi>.
The global-phase component of the partials cancels there, so projected and
unprojected frames give the same gradient; the Jacobian used for the SVD
decomposition stacks real and imaginary parts of the *projected* partials so
that J^T J reproduces the Fubini-Study metric exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliSum
from .geometry import SamplingSpec, MetricReport, empirical_metric
from .util import pairwise_mean


# ---------------------------------------------------------------------------
# Loss definitions
# ---------------------------------------------------------------------------


def tfim_hamiltonian(n_qubits: int, coupling: float = 1.0, fieldstrength: float = 1.0) -> PauliSum:
    """Open-chain transverse-field Ising Hamiltonian -J sum ZZ - h sum X."""
    terms: dict[str, complex] = {}

    def word(positions: dict[int, str]) -> str:
        return "".join(positions.get(q, "I") for q in range(n_qubits))

    for q in range(n_qubits - 1):
        terms[word({q: "Z", q + 1: "Z"})] = -coupling
    for q in range(n_qubits):
        w = word({q: "X"})
        terms[w] = terms.get(w, 0) - fieldstrength
    return PauliSum(n_qubits, terms)


@dataclass
class LossSpec:
    """Loss over the final state.

    kind='observable_expectation' measures ``observable`` (default Z on the
    first qubit); kind='vqe_tfim' measures the TFIM energy with couplings
    ``tfim_params = (J, h)``.
    """

    kind: str = "observable_expectation"
    observable: PauliSum | np.ndarray | None = None
    tfim_params: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.kind not in ("observable_expectation", "vqe_tfim"):
            raise ValueError(f"unknown loss kind {self.kind!r}")

    def observable_dense(self, n_qubits: int) -> np.ndarray:
        if self.kind == "vqe_tfim":
            return tfim_hamiltonian(n_qubits, *self.tfim_params).dense()
        if self.observable is None:
            letters = "Z" + "I" * (n_qubits - 1)
            return PauliSum.from_letters(n_qubits, letters).dense()
        if isinstance(self.observable, PauliSum):
            if self.observable.n_qubits != n_qubits:
                raise ValueError("observable qubit count does not match circuit")
            return self.observable.dense()
        obs = np.asarray(self.observable, dtype=complex)
        if obs.shape != (2 ** n_qubits, 2 ** n_qubits):
            raise ValueError("observable dimension does not match circuit")
        return obs

    def to_json(self) -> dict:
        data: dict = {"kind": self.kind}
        if self.kind == "vqe_tfim":
            data["tfim_params"] = list(self.tfim_params)
        elif isinstance(self.observable, PauliSum):
            data["observable"] = self.observable.to_text()
        return data


def ground_energy(loss: LossSpec, n_qubits: int) -> float:
    """Smallest eigenvalue of the loss observable (exact diagonalization)."""
    vals = np.linalg.eigvalsh(loss.observable_dense(n_qubits))
    return float(vals[0])


# ---------------------------------------------------------------------------
# Loss and gradient
# ---------------------------------------------------------------------------


def loss_and_gradient(circuit, theta: np.ndarray, loss: LossSpec) -> tuple[float, np.ndarray]:
    """Exact loss value and analytic gradient (matches finite differences)."""
    obs = loss.observable_dense(circuit.n_qubits)
    frame = circuit.tangent_frame(theta)
    value = float(np.real(frame.state.conj() @ (obs @ frame.state)))
    grad = 2.0 * np.real(frame.partials.conj().T @ (obs @ frame.state))
    return value, grad


@dataclass
class JacobianDecomposition:
    """SVD of the real Jacobian plus the loss cogradient at the state.

    J stacks Re and Im of the projected partials (2*dim x L), J = U S V^T.
    The gradient reconstructs as sum_i s_i <df, u_i> v_i and satisfies the
    Parseval identity ||grad||^2 = sum_i (s_i <df, u_i>)^2.
    """

    singular_values: np.ndarray
    left: np.ndarray             # 2*dim x r_full, state-side vectors
    right: np.ndarray            # L x r_full, parameter-side vectors
    r: int
    df: np.ndarray               # real cogradient, length 2*dim

    def reconstruct_gradient(self) -> np.ndarray:
        coeffs = self.singular_values * (self.left.T @ self.df)
        return self.right @ coeffs

    def gradient_norm_sq(self) -> float:
        coeffs = self.singular_values * (self.left.T @ self.df)
        return float(np.sum(coeffs ** 2))


RANK_SV_REL_TOL = 1e-12


def real_jacobian(frame) -> np.ndarray:
    return np.vstack([np.real(frame.projected), np.imag(frame.projected)])


def svd_chain_rule(circuit, theta: np.ndarray, loss: LossSpec) -> JacobianDecomposition:
    obs = loss.observable_dense(circuit.n_qubits)
    frame = circuit.tangent_frame(theta)
    jac = real_jacobian(frame)
    u, s, vt = np.linalg.svd(jac, full_matrices=False)
    r = int(np.sum(s > RANK_SV_REL_TOL * s[0])) if s.size and s[0] > 0 else 0
    opsi = obs @ frame.state
    df = np.concatenate([2.0 * np.real(opsi), 2.0 * np.imag(opsi)])
    return JacobianDecomposition(
        singular_values=s, left=u, right=vt.T, r=r, df=df
    )


# ---------------------------------------------------------------------------
# Gradient variance
# ---------------------------------------------------------------------------


@dataclass
class VarianceReport:
    """Componentwise gradient variance over seeded parameter draws.

    mode_variances re-expresses the same samples in the frozen eigenframe of
    the paired empirical metric: entry i is the variance of the gradient
    projection onto metric eigenvector i, the spectral form of the variance
    decomposition (their sum equals the component sum exactly).
    scaling_ratio is mean variance times kappa times d_eff, the two sides of
    the conditioning heuristic combined into one number.
    """

    per_component_variance: np.ndarray
    mean_component_variance: float
    first_component_variance: float
    n_samples: int
    seed: int
    product_var_deff: float
    mode_variances: np.ndarray
    scaling_ratio: float

    def to_json(self) -> dict:
        return {
            "per_component_variance": [float(v) for v in self.per_component_variance],
            "mean_component_variance": self.mean_component_variance,
            "first_component_variance": self.first_component_variance,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "product_var_deff": self.product_var_deff,
            "mode_variances": [float(v) for v in self.mode_variances],
            "scaling_ratio": self.scaling_ratio,
        }


def gradient_variance(
    circuit,
    loss: LossSpec,
    sampling: SamplingSpec,
    metric: MetricReport | None = None,
) -> VarianceReport:
    """Sample variance of the gradient, paired with an empirical metric.

    When ``metric`` is omitted it is computed from the same sampling spec, so
    the variance and the effective dimension describe the same parameter
    distribution.  Reductions are pairwise and per-sample streams are keyed
    by index: results do not depend on evaluation order.
    """
    if sampling.n_samples < 2:
        raise ValueError("variance estimation needs n_samples >= 2")
    num = circuit.num_params
    grads = np.empty((sampling.n_samples, num))
    for s in range(sampling.n_samples):
        theta = sampling.draw(num, s)
        _, grads[s] = loss_and_gradient(circuit, theta, loss)
    mean_grad = pairwise_mean(grads)
    centered = grads - mean_grad
    factor = sampling.n_samples / (sampling.n_samples - 1)
    per_component = factor * pairwise_mean(centered ** 2)

    if metric is None:
        metric = empirical_metric(circuit, sampling)
    eigvecs = np.linalg.eigh(metric.metric)[1][:, ::-1]
    mode_centered = centered @ eigvecs
    mode_variances = factor * pairwise_mean(mode_centered ** 2)

    mean_var = float(pairwise_mean(per_component))
    kappa = metric.kappa if np.isfinite(metric.kappa) else np.inf
    return VarianceReport(
        per_component_variance=per_component,
        mean_component_variance=mean_var,
        first_component_variance=float(per_component[0]),
        n_samples=sampling.n_samples,
        seed=sampling.seed,
        product_var_deff=mean_var * metric.d_eff,
        mode_variances=mode_variances,
        scaling_ratio=float(mean_var * kappa * metric.d_eff),
    )


# ---------------------------------------------------------------------------
# Scaling-law fits
# ---------------------------------------------------------------------------


@dataclass
class ScalingFit:
    """Least-squares fit of log-variance against d_eff or log n.

    model='exp_in_deff': log Var = intercept - rate * d_eff.
    model='poly_in_n':   log Var = intercept - rate * log n.
    """

    model: str
    rate: float
    intercept: float
    r_squared: float
    n_used: int
    n_dropped: int

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "rate": self.rate,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_used": self.n_used,
            "n_dropped": self.n_dropped,
        }


def fit_scaling(records: list[tuple[float, float, float]], model: str) -> ScalingFit:
    """Fit the decay rate from (n, d_eff, variance) records.

    Non-positive variances cannot enter a log fit; they are dropped and
    counted, never clamped.
    """
    if model not in ("exp_in_deff", "poly_in_n"):
        raise ValueError(f"unknown scaling model {model!r}")
    usable = [(n, d, v) for (n, d, v) in records if v > 0]
    dropped = len(records) - len(usable)
    if len(usable) < 3:
        raise ValueError("need at least 3 records with positive variance")
    y = np.log([v for _, _, v in usable])
    if model == "exp_in_deff":
        x = np.array([d for _, d, _ in usable])
    else:
        x = np.log([n for n, _, _ in usable])
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    pred = design @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return ScalingFit(
        model=model,
        rate=-slope,
        intercept=intercept,
        r_squared=r2,
        n_used=len(usable),
        n_dropped=dropped,
    )


# ---------------------------------------------------------------------------
# Jacobian norm statistics
# ---------------------------------------------------------------------------


def jacobian_norm_estimate(circuit, sampling: SamplingSpec) -> tuple[float, np.ndarray]:
    """Mean squared largest singular value of the real Jacobian over draws."""
    num = circuit.num_params
    per_sample = np.empty(sampling.n_samples)
    for s in range(sampling.n_samples):
        theta = sampling.draw(num, s)
        jac = real_jacobian(circuit.tangent_frame(theta))
        per_sample[s] = np.linalg.norm(jac, 2) ** 2
    return float(pairwise_mean(per_sample)), per_sample


# ---------------------------------------------------------------------------
# Plain gradient descent (short-budget optimization runs)
# ---------------------------------------------------------------------------


def gradient_descent(
    circuit,
    loss: LossSpec,
    theta0: np.ndarray,
    steps: int,
    rate: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-rate descent; returns (final theta, loss trajectory incl. start)."""
    theta = np.asarray(theta0, dtype=float).copy()
    losses = np.empty(steps + 1)
    for k in range(steps):
        value, grad = loss_and_gradient(circuit, theta, loss)
        losses[k] = value
        theta = theta - rate * grad
    losses[steps], _ = loss_and_gradient(circuit, theta, loss)
    return theta, losses
