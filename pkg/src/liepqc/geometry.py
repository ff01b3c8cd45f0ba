"""Fubini-Study pullback metric: pointwise, empirical, and spectral diagnostics.

The pointwise metric is g_ij = Re <d_i psi | d_j psi>_projected, built from
the phase-projected tangent frame.  The empirical metric averages g over
seeded parameter draws; the average uses a pairwise reduction tree keyed only
to the sample count, so it is bit-identical regardless of how samples were
scheduled across workers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .util import pairwise_mean, rng_from

RANK_REL_TOL = 1e-8
ZERO_METRIC_FLOOR = 1e-14


@dataclass(frozen=True)
class SamplingSpec:
    """Parameter distribution for empirical averages.

    ``uniform_periodic`` draws each component from [0, 2*pi); ``gaussian``
    draws center + sigma * N(0, 1) (center defaults to the origin).  Sample s
    uses an independent stream derived from (seed, s).
    """

    distribution: str = "uniform_periodic"
    n_samples: int = 50
    seed: int = 0
    sigma: float = 1.0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.distribution not in ("uniform_periodic", "gaussian"):
            raise ValueError(f"unknown distribution {self.distribution!r}")

    def draw(self, num_params: int, index: int, center: np.ndarray | None = None) -> np.ndarray:
        rng = rng_from(self.seed, "theta", index)
        if self.distribution == "uniform_periodic":
            return rng.uniform(0.0, 2.0 * np.pi, num_params)
        base = np.zeros(num_params) if center is None else np.asarray(center, dtype=float)
        return base + self.sigma * rng.standard_normal(num_params)

    def to_json(self) -> dict:
        return {
            "distribution": self.distribution,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "sigma": self.sigma,
        }


@dataclass
class MetricReport:
    """Empirical metric with spectrum, rank, effective dimension, conditioning."""

    metric: np.ndarray
    eigenvalues: np.ndarray      # descending
    rank: int
    d_eff: float
    kappa: float
    n_samples: int
    sample_spec: SamplingSpec | None
    rank_rel_tol: float = RANK_REL_TOL

    def to_json(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "rank": self.rank,
            "d_eff": self.d_eff,
            "kappa": self.kappa,
            "n_samples": self.n_samples,
            "rank_rel_tol": self.rank_rel_tol,
            "sampling": self.sample_spec.to_json() if self.sample_spec else None,
        }


# ---------------------------------------------------------------------------
# Metric evaluation
# ---------------------------------------------------------------------------


def fs_metric_at(circuit, theta: np.ndarray) -> np.ndarray:
    """Pointwise pullback metric at one parameter point (symmetric PSD)."""
    frame = circuit.tangent_frame(theta)
    g = np.real(frame.projected.conj().T @ frame.projected)
    return 0.5 * (g + g.T)


def empirical_metric(circuit, sampling: SamplingSpec, center: np.ndarray | None = None) -> MetricReport:
    """Average of the pointwise metric over seeded parameter draws."""
    num = circuit.num_params
    metrics = np.empty((sampling.n_samples, num, num))
    for s in range(sampling.n_samples):
        theta = sampling.draw(num, s, center=center)
        metrics[s] = fs_metric_at(circuit, theta)
    g_hat = pairwise_mean(metrics)
    return metric_report(g_hat, n_samples=sampling.n_samples, sample_spec=sampling)


def metric_report(
    g: np.ndarray,
    n_samples: int = 1,
    sample_spec: SamplingSpec | None = None,
    rank_rel_tol: float = RANK_REL_TOL,
) -> MetricReport:
    eigenvalues = np.linalg.eigvalsh(g)[::-1].copy()
    rank = metric_rank(g, rank_rel_tol, _eigenvalues=eigenvalues)
    kappa = condition_number(g, rank, _eigenvalues=eigenvalues) if rank >= 1 else np.inf
    return MetricReport(
        metric=g,
        eigenvalues=eigenvalues,
        rank=rank,
        d_eff=effective_dimension(g, _eigenvalues=eigenvalues),
        kappa=kappa,
        n_samples=n_samples,
        sample_spec=sample_spec,
        rank_rel_tol=rank_rel_tol,
    )


# ---------------------------------------------------------------------------
# Spectral functionals
# ---------------------------------------------------------------------------


def _eigs(metric: np.ndarray, cached: np.ndarray | None) -> np.ndarray:
    if cached is not None:
        return cached
    return np.linalg.eigvalsh(metric)[::-1].copy()


def effective_dimension(metric: np.ndarray, _eigenvalues: np.ndarray | None = None) -> float:
    """Spectral participation ratio (Tr g)^2 / Tr(g^2); 0 for the zero metric."""
    ev = _eigs(metric, _eigenvalues)
    if ev.size == 0 or ev[0] <= ZERO_METRIC_FLOOR:
        return 0.0
    s1 = float(np.sum(ev))
    s2 = float(np.sum(ev ** 2))
    return s1 * s1 / s2


def metric_rank(
    metric: np.ndarray, rel_tol: float = RANK_REL_TOL, _eigenvalues: np.ndarray | None = None
) -> int:
    """Eigenvalues above rel_tol times the largest one (0 for the zero metric)."""
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must be in (0, 1)")
    ev = _eigs(metric, _eigenvalues)
    if ev.size == 0 or ev[0] <= ZERO_METRIC_FLOOR:
        return 0
    return int(np.sum(ev > rel_tol * ev[0]))


def condition_number(
    metric: np.ndarray, rank: int, _eigenvalues: np.ndarray | None = None
) -> float:
    """lambda_max / lambda_rank on the numerically resolved subspace.

    This is a pseudo condition number: rank-deficient metrics are conditioned
    on their resolved eigenvalues rather than reported as singular.
    """
    if rank < 1:
        raise ValueError("condition_number needs rank >= 1")
    ev = _eigs(metric, _eigenvalues)
    return float(ev[0] / ev[rank - 1])


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def write_spectrum_csv(path: str | Path, eigenvalues: np.ndarray) -> None:
    """Spectrum file with columns (index, eigenvalue), consumed by the plotter."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue"])
        for i, v in enumerate(eigenvalues):
            writer.writerow([i, repr(float(v))])


def read_spectrum_csv(path: str | Path) -> np.ndarray:
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    return np.array([float(r[1]) for r in rows[1:]])
