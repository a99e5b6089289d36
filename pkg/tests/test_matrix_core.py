import numpy as np
import pytest

from ewkit import matrix_core as mc
from ewkit.errors import NonHermitianInput, ShapeMismatch

from oracles import charpoly_eigs, partial_transpose_loops


def test_kron_identity_and_basis_position():
    assert np.array_equal(mc.kron(np.eye(2), np.eye(2)), np.eye(4))
    m = mc.kron(mc.basis_matrix(0, 1, 2), mc.basis_matrix(0, 1, 2))
    assert m[0, 3] == 1 and np.count_nonzero(m) == 1


def test_kron_spectrum_is_products(rng):
    a, b = mc.random_hermitian(rng, 2), mc.random_hermitian(rng, 2)
    prods = np.sort(np.outer(np.linalg.eigvalsh(a), np.linalg.eigvalsh(b)).ravel())
    assert np.allclose(mc.eigvals_hermitian(mc.kron(a, b)), prods, atol=1e-12)


def test_kron_associative(rng):
    # integer entries keep every product exact
    a, b, c = (rng.integers(-5, 6, (2, 3)) + 1j * rng.integers(-5, 6, (2, 3)) for _ in range(3))
    assert np.array_equal(mc.kron(mc.kron(a, b), c), mc.kron(a, mc.kron(b, c)))


def test_partial_transpose_examples(rng):
    assert np.array_equal(mc.partial_transpose(np.eye(4)), np.eye(4))
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    pt = mc.partial_transpose(np.outer(v, v))
    assert np.allclose(mc.eigvals_hermitian(pt), [-0.5, 0.5, 0.5, 0.5], atol=1e-14)
    o = mc.random_hermitian(rng, 9)
    assert np.array_equal(mc.partial_transpose(mc.partial_transpose(o)), o)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_partial_transpose_matches_loops(rng, dims):
    d = dims[0] * dims[1]
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    assert np.array_equal(mc.partial_transpose(m, dims), partial_transpose_loops(m, *dims))
    assert np.allclose(mc.partial_transpose(m, dims, sys="A"),
                       mc.partial_transpose(m, dims).T)


def test_partial_trace(rng):
    a, b = mc.random_density(rng, 2), mc.random_density(rng, 3)
    ab = mc.kron(a, b)
    assert np.allclose(mc.partial_trace(ab, (2, 3), sys=1), a)
    assert np.allclose(mc.partial_trace(ab, (2, 3), sys=0), b)


def test_eig_examples(rng):
    ev, _ = mc.eig_hermitian(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(ev, [1, 2, 3])
    z = np.ones((3, 3)) - np.eye(3)
    assert np.allclose(mc.eigvals_hermitian(z), [-1, -1, 2], atol=1e-12)
    m = mc.random_hermitian(rng, 8)
    ev, vec = mc.eig_hermitian(m)
    assert mc.frobenius(vec @ np.diag(ev) @ vec.conj().T - m) <= 1e-10 * mc.frobenius(m)
    assert np.allclose(vec.conj().T @ vec, np.eye(8), atol=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_eig_vs_charpoly(rng, d):
    for _ in range(50):
        m = mc.random_hermitian(rng, d)
        assert np.allclose(mc.eigvals_hermitian(m), charpoly_eigs(m), atol=1e-9)


def test_eig_deterministic(rng):
    m = mc.random_hermitian(rng, 6)
    a, b = mc.eig_hermitian(m), mc.eig_hermitian(m.copy())
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianInput):
        mc.eig_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NonHermitianInput):
        mc.is_psd(np.array([[0, 1], [0, 0]]))


def test_hadamard(rng):
    a = rng.normal(size=(3, 3))
    assert np.array_equal(mc.hadamard(a, np.ones((3, 3))), a)
    with pytest.raises(ShapeMismatch):
        mc.hadamard(np.eye(2), np.eye(3))
    for _ in range(50):
        p, q = mc.random_psd(rng, 4), mc.random_psd(rng, 4)
        assert mc.is_psd(mc.hadamard(p, q))


def test_is_psd_examples():
    assert mc.is_psd(np.eye(3), 1e-10)
    assert not mc.is_psd(np.diag([1, -1e-6]), 1e-10)


def test_matrix_json_roundtrip(rng):
    m = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    obj = mc.matrix_to_json(m)
    assert obj["rows"] == 3 and obj["cols"] == 2 and len(obj["data"]) == 6
    assert np.array_equal(mc.matrix_from_json(obj), m)
