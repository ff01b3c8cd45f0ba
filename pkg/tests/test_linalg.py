"""Dense operator helpers: commutators, HS geometry, eigensolves, exponentials."""

import numpy as np
import pytest

from liepqc.linalg import (
    commutator,
    expm_skew,
    gram_schmidt_hs,
    hermitian_eig,
    hs_inner,
    hs_norm,
    is_hermitian,
    is_skew_hermitian,
    op_norm,
)
from liepqc.pauli import PauliString, PauliSum

X = PauliString(1, "X").dense()
Y = PauliString(1, "Y").dense()
Z = PauliString(1, "Z").dense()


def _random_skew(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (g - g.conj().T)


def test_commutator_su2():
    np.testing.assert_allclose(commutator(X, Y), 2j * Z, atol=1e-15)


def test_commutator_derived_two_qubit():
    # oracle: expand both operator orders densely
    xx = PauliString(2, "XX").dense()
    zi = PauliString(2, "ZI").dense()
    want = xx @ zi - zi @ xx
    got = commutator(xx, zi)
    np.testing.assert_allclose(got, want, atol=1e-15)
    np.testing.assert_allclose(got, -2j * PauliString(2, "YX").dense(), atol=1e-15)


def test_commutator_antisymmetry():
    rng = np.random.default_rng(0)
    a = _random_skew(rng, 4)
    np.testing.assert_allclose(commutator(a, a), np.zeros((4, 4)), atol=1e-15)


def test_commutator_dim_mismatch():
    with pytest.raises(ValueError):
        commutator(X, PauliString(2, "XX").dense())


def test_commutator_preserves_skew():
    rng = np.random.default_rng(1)
    a, b = _random_skew(rng, 8), _random_skew(rng, 8)
    assert is_skew_hermitian(commutator(a, b))


def test_jacobi_identity():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a, b, c = (_random_skew(rng, 4) for _ in range(3))
        resid = (commutator(commutator(a, b), c)
                 + commutator(commutator(b, c), a)
                 + commutator(commutator(c, a), b))
        assert np.max(np.abs(resid)) < 1e-10


def test_hs_inner_values():
    for n in (1, 2, 3):
        xs = PauliString(n, "X" + "I" * (n - 1)).dense()
        assert hs_inner(xs, xs) == pytest.approx(2 ** n)
    assert hs_inner(X, Z) == pytest.approx(0.0)
    assert hs_inner(np.zeros((2, 2)), Z) == pytest.approx(0.0)


def test_hs_inner_rejects_mixed_symmetry():
    with pytest.raises(ValueError):
        hs_inner(X, 1j * X)   # Hermitian against skew-Hermitian is not real


def test_hermitian_eig_trivial():
    vals, _ = hermitian_eig(Z)
    np.testing.assert_allclose(vals, [1.0, -1.0])
    vals, _ = hermitian_eig(np.eye(4))
    np.testing.assert_allclose(vals, np.ones(4))


def test_hermitian_eig_derived_case():
    h = PauliString(2, "XX").dense() + PauliString(2, "ZI").dense()
    oracle = np.sort(np.linalg.eigvalsh(h))[::-1]
    vals, vecs = hermitian_eig(h)
    np.testing.assert_allclose(vals, oracle, atol=1e-12)
    root2 = np.sqrt(2.0)
    np.testing.assert_allclose(vals, [root2, root2, -root2, -root2], atol=1e-12)
    recon = (vecs * vals) @ vecs.conj().T
    assert np.linalg.norm(recon - h) / np.linalg.norm(h) < 1e-10


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eig(1j * X)


def test_expm_skew_pauli_rotation():
    # exp(-i (pi/2) X) |0> = -i |1>
    u = expm_skew(-1j * X, np.pi / 2)
    state = u @ np.array([1, 0], dtype=complex)
    np.testing.assert_allclose(state, [0, -1j], atol=1e-12)


def test_expm_skew_zero():
    np.testing.assert_allclose(expm_skew(np.zeros((4, 4)), 1.0), np.eye(4), atol=1e-15)


def test_expm_skew_diagonal_derived():
    # exp(-i (pi/3) Z@Z)|00> = e^{-i pi/3}|00>, same through both paths
    zz = PauliSum.from_letters(2, "ZZ", -1j)
    psi0 = np.array([1, 0, 0, 0], dtype=complex)
    fast = expm_skew(zz, np.pi / 3) @ psi0
    eig = expm_skew(zz.dense(), np.pi / 3) @ psi0
    np.testing.assert_allclose(fast, eig, atol=1e-12)
    np.testing.assert_allclose(fast[0], np.exp(-1j * np.pi / 3), atol=1e-12)


def test_expm_fast_path_matches_eig_path():
    rng = np.random.default_rng(5)
    from liepqc.pauli import all_strings

    for _ in range(20):
        n = int(rng.integers(1, 4))
        pool = [w for w in all_strings(n) if set(w) != {"I"}]
        coeff = -1j * rng.uniform(0.1, 2.0)
        ps = PauliSum.from_letters(n, pool[rng.integers(len(pool))], coeff)
        t = rng.uniform(0.1, 2.0)
        np.testing.assert_allclose(
            expm_skew(ps, t), expm_skew(ps.dense(), t), atol=1e-10
        )


def test_expm_unitary_and_inverse():
    rng = np.random.default_rng(6)
    for _ in range(20):
        x = _random_skew(rng, 8)
        t = rng.uniform(0.1, 2.0)
        u = expm_skew(x, t)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(8), atol=1e-10)
        np.testing.assert_allclose(u @ expm_skew(x, -t), np.eye(8), atol=1e-10)


def test_expm_rejects_non_skew():
    with pytest.raises(ValueError):
        expm_skew(X, 1.0)


def test_op_norm_values():
    assert op_norm(PauliString(2, "XY").dense()) == pytest.approx(1.0)
    assert op_norm(3.0 * np.eye(4)) == pytest.approx(3.0)
    # oracle: largest singular value from the full SVD
    m = X + Z
    oracle = float(np.linalg.svd(m, compute_uv=False)[0])
    assert op_norm(m) == pytest.approx(oracle)
    assert op_norm(m) == pytest.approx(np.sqrt(2.0))


class TestGramSchmidt:
    def test_collinear_inputs(self):
        basis, residuals = gram_schmidt_hs([1j * X, 2j * X])
        assert len(basis) == 1
        assert residuals[1] < 1e-12

    def test_orthogonal_inputs(self):
        basis, _ = gram_schmidt_hs([1j * X, 1j * Y])
        assert len(basis) == 2
        for b in basis:
            assert hs_norm(b) == pytest.approx(1.0)

    def test_derived_residual(self):
        # second input i(X+Y)/sqrt(2): projection leaves iY/sqrt(2), norm 1
        v2 = 1j * (X + Y) / np.sqrt(2.0)
        basis, residuals = gram_schmidt_hs([1j * X, v2])
        assert len(basis) == 2
        assert residuals[1] == pytest.approx(hs_norm(1j * Y) / np.sqrt(2.0))
        assert residuals[1] == pytest.approx(1.0)

    def test_orthonormality_property(self):
        rng = np.random.default_rng(9)
        mats = [_random_skew(rng, 4) for _ in range(6)]
        basis, _ = gram_schmidt_hs(mats)
        for i, bi in enumerate(basis):
            for j, bj in enumerate(basis):
                target = 1.0 if i == j else 0.0
                assert abs(hs_inner(bi, bj) - target) <= 1e-8

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            gram_schmidt_hs([1j * X], tolerance=0.0)


def test_hermiticity_checks():
    assert is_hermitian(X) and not is_skew_hermitian(X)
    assert is_skew_hermitian(1j * X) and not is_hermitian(1j * X)
