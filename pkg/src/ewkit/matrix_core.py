"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Bipartite
operators on C^m (x) C^n are square arrays of size m*n together with the pair
of subsystem dimensions, ordered so that the first factor is the slow index.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import NonHermitianInput, ShapeMismatch

# Centralized tolerances.
TOL_HERM = 1e-12
TOL_EIG = 1e-10  # relative to the Frobenius norm
TOL_PSD = 1e-10


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ShapeMismatch(f"expected a 2-d array, got shape {m.shape}")
    return m


def basis_matrix(i: int, j: int, n: int) -> np.ndarray:
    """e_ij = |e_i><e_j| with 0-based indices."""
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def is_hermitian(m, tol: float = TOL_HERM) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol * scale)


def _check_hermitian(m: np.ndarray, tol: float = TOL_HERM) -> None:
    if not is_hermitian(m, tol):
        raise NonHermitianInput("matrix is not Hermitian within tolerance")


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns).

    LAPACK ``heevd`` through ``numpy.linalg.eigh``; deterministic for a fixed
    input. The input is symmetrized before the call so that roundoff-level
    asymmetry cannot leak into the spectrum.
    """
    m = as_matrix(m)
    _check_hermitian(m)
    h = 0.5 * (m + m.conj().T)
    return np.linalg.eigh(h)


def eigvals_hermitian(m) -> np.ndarray:
    m = as_matrix(m)
    _check_hermitian(m)
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))


def min_eigenvalue(m) -> float:
    return float(eigvals_hermitian(m)[0])


def is_psd(m, tol: float = TOL_PSD) -> bool:
    return min_eigenvalue(m) >= -tol


def hadamard(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")
    return a * b


def _split_dims(m: np.ndarray, dims: Sequence[int] | None) -> tuple[int, int]:
    if dims is None:
        d = int(round(np.sqrt(m.shape[0])))
        dims = (d, d)
    da, db = int(dims[0]), int(dims[1])
    if m.shape != (da * db, da * db):
        raise ShapeMismatch(f"operator of shape {m.shape} does not act on C^{da} (x) C^{db}")
    return da, db


def partial_transpose(m, dims: Sequence[int] | None = None, sys: int = 1) -> np.ndarray:
    """Transpose the indices of subsystem ``sys`` (0 = first factor, 1 = second).

    ``sys`` may also be given as ``"A"``/``"B"``. Square dimensions are
    assumed when ``dims`` is omitted.
    """
    m = as_matrix(m)
    da, db = _split_dims(m, dims)
    if sys in ("A", "a"):
        sys = 0
    elif sys in ("B", "b"):
        sys = 1
    t = m.reshape(da, db, da, db)
    if sys == 0:
        t = t.transpose(2, 1, 0, 3)
    elif sys == 1:
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"sys must be 0/1 or 'A'/'B', got {sys!r}")
    return t.reshape(da * db, da * db)


def partial_trace(m, dims: Sequence[int] | None = None, sys: int = 1) -> np.ndarray:
    """Trace out subsystem ``sys``."""
    m = as_matrix(m)
    da, db = _split_dims(m, dims)
    t = m.reshape(da, db, da, db)
    if sys == 0:
        return np.einsum("ijil->jl", t)
    return np.einsum("ijkj->ik", t)


def blocks(m, dims: Sequence[int] | None = None) -> np.ndarray:
    """Array ``b`` with ``b[i, j]`` the (i, j) block in  m = sum_ij e_ij (x) b[i, j]."""
    m = as_matrix(m)
    da, db = _split_dims(m, dims)
    return m.reshape(da, db, da, db).transpose(0, 2, 1, 3)


def from_blocks(b: np.ndarray) -> np.ndarray:
    da, _, db, _ = b.shape
    return b.transpose(0, 2, 1, 3).reshape(da * db, da * db)


def frobenius(m) -> float:
    return float(np.linalg.norm(np.asarray(m)))


# random helpers shared by probes and tests

def haar_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """``count`` Haar-random unit vectors in C^dim, as rows."""
    v = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (a + a.conj().T)


def random_psd(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    a = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    return a @ a.conj().T


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    p = random_psd(rng, dim, rank)
    return p / np.trace(p).real


# Matrix JSON: {"rows": r, "cols": c, "data": [[re, im], ...]} row-major.

def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    flat = m.reshape(-1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if rows <= 0 or cols <= 0 or len(data) != rows * cols:
        raise ShapeMismatch(f"matrix JSON has {len(data)} entries for shape ({rows}, {cols})")
    arr = np.array([complex(re, im) for re, im in data], dtype=complex)
    return arr.reshape(rows, cols)
