"""Shared plumbing: deterministic seeding, reductions, complex JSON encoding.

All randomness in the package flows through :func:`rng_from`, which derives
independent numpy Generators from a master seed plus an arbitrary tag tuple.
Tags may mix ints and strings; strings are hashed with SHA-256 so streams are
stable across processes and Python versions (no salted ``hash()``).
"""

from __future__ import annotations

import hashlib

import numpy as np


def stable_key(*parts: int | str) -> list[int]:
    """Map a tag tuple to a list of non-negative ints usable as SeedSequence entropy."""
    out: list[int] = []
    for p in parts:
        if isinstance(p, (int, np.integer)):
            out.append(int(p) & 0xFFFFFFFFFFFFFFFF)
        else:
            digest = hashlib.sha256(str(p).encode("utf-8")).digest()
            out.append(int.from_bytes(digest[:8], "little"))
    return out


def rng_from(*parts: int | str) -> np.random.Generator:
    """Deterministic Generator keyed by (master seed, tags...)."""
    return np.random.default_rng(np.random.SeedSequence(stable_key(*parts)))


def pairwise_sum(values: np.ndarray) -> np.ndarray:
    """Sum over axis 0 by recursive pairing.

    The reduction tree depends only on the number of summands, so results are
    bit-identical no matter how the per-sample work was scheduled.
    """
    arr = np.asarray(values)
    m = arr.shape[0]
    if m == 0:
        raise ValueError("pairwise_sum of empty collection")
    while m > 1:
        half = m // 2
        head = arr[: 2 * half : 2] + arr[1 : 2 * half : 2]
        if m % 2:
            arr = np.concatenate([head, arr[2 * half : m]], axis=0)
        else:
            arr = head
        m = arr.shape[0]
    return arr[0]


def pairwise_mean(values: np.ndarray) -> np.ndarray:
    arr = np.asarray(values)
    return pairwise_sum(arr) / arr.shape[0]


# ---------------------------------------------------------------------------
# Complex <-> JSON: every complex entry becomes a [re, im] pair
# ---------------------------------------------------------------------------


def complex_to_json(a: np.ndarray) -> list:
    """Encode a complex vector or matrix as nested [re, im] pairs."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in arr]
    if arr.ndim == 2:
        return [[[float(z.real), float(z.imag)] for z in row] for row in arr]
    raise ValueError(f"unsupported ndim {arr.ndim}")


def complex_from_json(data: list) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2 and arr.shape[-1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[:, :, 0] + 1j * arr[:, :, 1]
    raise ValueError("expected nested [re, im] pairs")
