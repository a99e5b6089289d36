"""Positive map families on M_n(C) and structural probes.

Every ``apply_*`` function accepts a single matrix or a stack of matrices
with shape ``(..., n, n)``.

Phases are indexed by 1-based labels ``i < j``; ``z_ji = conj(z_ij)`` and a
missing entry means ``z_ij = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import matrix_core as mc
from .errors import (
    DimensionMismatch,
    InvalidPhase,
    InvalidUnitary,
    NonUnimodularPhases,
    NormalizationError,
    OddDimension,
    ShapeMismatch,
    SingularB,
)
from .probing import ProbeReport, chunk_rngs, polish, N_POLISH

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)

FAMILIES = (
    "reduction",
    "gen-reduction",
    "robertson",
    "gen-robertson",
    "breuer-hall",
    "transpose",
    "identity",
    "depolarizing",
    "hadamard-multiplier",
)
_PHASED = ("gen-reduction", "gen-robertson")


@dataclass(frozen=True)
class PhaseCollection:
    """Complex numbers z_ij, i < j, on labels 1..n_labels with |z_ij| <= 1."""

    n_labels: int
    entries: Mapping[tuple[int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, val in dict(self.entries).items():
            i, j = (int(key[0]), int(key[1]))
            if not (1 <= i < j <= self.n_labels):
                raise InvalidPhase(f"pair ({i}, {j}) not an ordered pair in 1..{self.n_labels}")
            clean[(i, j)] = complex(val)
        object.__setattr__(self, "entries", clean)
        if getattr(self, "_unchecked", False):
            return
        for (i, j), val in clean.items():
            if abs(val) > 1 + mc.TOL_HERM:
                raise InvalidPhase(f"|z_{i}{j}| = {abs(val):.6g} > 1")

    @classmethod
    def unchecked(cls, n_labels: int, entries: Mapping[tuple[int, int], complex]) -> "PhaseCollection":
        """Skip the |z| <= 1 validation; only for deliberately invalid test inputs."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "_unchecked", True)
        obj.__init__(n_labels, entries)
        return obj

    @classmethod
    def uniform(cls, n_labels: int, value: complex = 1.0) -> "PhaseCollection":
        return cls(n_labels, {(i, j): value for i in range(1, n_labels + 1)
                              for j in range(i + 1, n_labels + 1)})

    @classmethod
    def from_polar(cls, n_labels: int, angles: Mapping[tuple[int, int], float]) -> "PhaseCollection":
        return cls(n_labels, {key: np.exp(1j * float(t)) for key, t in angles.items()})

    @classmethod
    def random_unimodular(cls, n_labels: int, rng: np.random.Generator) -> "PhaseCollection":
        pairs = [(i, j) for i in range(1, n_labels + 1) for j in range(i + 1, n_labels + 1)]
        theta = rng.uniform(0, 2 * np.pi, len(pairs))
        return cls(n_labels, {p: np.exp(1j * t) for p, t in zip(pairs, theta)})

    @classmethod
    def random_disc(cls, n_labels: int, rng: np.random.Generator) -> "PhaseCollection":
        """Uniform on the closed unit disc."""
        pairs = [(i, j) for i in range(1, n_labels + 1) for j in range(i + 1, n_labels + 1)]
        r = np.sqrt(rng.uniform(0, 1, len(pairs)))
        theta = rng.uniform(0, 2 * np.pi, len(pairs))
        return cls(n_labels, {p: rr * np.exp(1j * t) for p, rr, t in zip(pairs, r, theta)})

    def get(self, i: int, j: int) -> complex:
        if i == j:
            raise InvalidPhase("z_ii is undefined")
        if i < j:
            return self.entries.get((i, j), 1.0 + 0j)
        return complex(np.conj(self.entries.get((j, i), 1.0 + 0j)))

    def matrix(self, diagonal: complex = 0.0) -> np.ndarray:
        """Hermitian matrix with entries z_ij off the diagonal."""
        n = self.n_labels
        z = np.full((n, n), complex(diagonal))
        for i in range(n):
            for j in range(n):
                if i != j:
                    z[i, j] = self.get(i + 1, j + 1)
        return z

    def is_unimodular(self, tol: float = 1e-12) -> bool:
        return all(abs(abs(self.get(i, j)) - 1) <= tol
                   for i in range(1, self.n_labels + 1) for j in range(i + 1, self.n_labels + 1))

    def angles(self) -> dict[tuple[int, int], float]:
        return {(i, j): float(np.angle(self.get(i, j)))
                for i in range(1, self.n_labels + 1) for j in range(i + 1, self.n_labels + 1)}

    def to_json(self) -> list[dict]:
        return [{"i": i, "j": j, "re": float(v.real), "im": float(v.imag)}
                for (i, j), v in sorted(self.entries.items())]

    @classmethod
    def from_json(cls, n_labels: int, items) -> "PhaseCollection":
        entries = {}
        for it in items or []:
            key = (int(it["i"]), int(it["j"]))
            if "theta" in it:
                entries[key] = np.exp(1j * float(it["theta"]))
            else:
                entries[key] = complex(float(it.get("re", 0.0)), float(it.get("im", 0.0)))
        return cls(n_labels, entries)


def check_antisymmetric_unitary(u, tol: float = mc.TOL_HERM) -> np.ndarray:
    u = mc.as_matrix(u)
    n = u.shape[0]
    if u.shape != (n, n):
        raise InvalidUnitary("U must be square")
    if np.max(np.abs(u.conj().T @ u - np.eye(n))) > tol * max(1, n):
        raise InvalidUnitary("U is not unitary")
    if np.max(np.abs(u.T + u)) > tol:
        raise InvalidUnitary("U is not antisymmetric")
    return u


@dataclass(frozen=True)
class MapSpec:
    family: str
    dim: int
    phases: PhaseCollection | None = None
    unitary: np.ndarray | None = None
    multiplier: np.ndarray | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown map family {self.family!r}")
        if self.dim < 1:
            raise DimensionMismatch("dimension must be positive")
        if self.family in ("reduction", "gen-reduction") and self.dim < 2:
            raise DimensionMismatch("reduction maps need n >= 2")
        if self.family in ("robertson", "gen-robertson", "breuer-hall"):
            if self.dim % 2:
                raise OddDimension(f"{self.family} needs an even dimension, got {self.dim}")
            if self.dim < 4:
                raise DimensionMismatch(f"{self.family} needs k >= 2")
        if self.family in _PHASED:
            labels = self.dim if self.family == "gen-reduction" else self.dim // 2
            phases = self.phases if self.phases is not None else PhaseCollection(labels)
            if phases.n_labels != labels:
                raise DimensionMismatch(f"phases over {phases.n_labels} labels, map needs {labels}")
            object.__setattr__(self, "phases", phases)
        if self.family == "breuer-hall":
            u = self.unitary
            if u is None:
                u = np.kron(np.eye(self.dim // 2), SIGMA_Y)
            u = check_antisymmetric_unitary(u)
            if u.shape[0] != self.dim:
                raise DimensionMismatch("U has the wrong size")
            object.__setattr__(self, "unitary", u)
        if self.family == "hadamard-multiplier":
            if self.multiplier is None:
                raise ValueError("hadamard-multiplier needs a multiplier matrix")
            m = mc.as_matrix(self.multiplier)
            if m.shape != (self.dim, self.dim):
                raise ShapeMismatch("multiplier has the wrong size")
            object.__setattr__(self, "multiplier", m)

    @property
    def k(self) -> int:
        return self.dim // 2

    def apply(self, x) -> np.ndarray:
        return apply_map(self, x)

    def to_json(self) -> dict:
        out: dict = {"family": self.family}
        if self.family in ("robertson", "gen-robertson", "breuer-hall"):
            out["k"] = self.k
        else:
            out["n"] = self.dim
        if self.phases is not None:
            out["z"] = self.phases.to_json()
        if self.family == "breuer-hall":
            out["U"] = mc.matrix_to_json(self.unitary)
        if self.family == "hadamard-multiplier":
            out["multiplier"] = mc.matrix_to_json(self.multiplier)
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "MapSpec":
        family = obj["family"]
        if "k" in obj:
            dim = 2 * int(obj["k"])
        elif "n" in obj:
            dim = int(obj["n"])
        else:
            raise DimensionMismatch("MapSpec JSON needs 'n' or 'k'")
        phases = None
        if family in _PHASED:
            labels = dim if family == "gen-reduction" else dim // 2
            phases = PhaseCollection.from_json(labels, obj.get("z"))
        unitary = mc.matrix_from_json(obj["U"]) if "U" in obj else None
        mult = mc.matrix_from_json(obj["multiplier"]) if "multiplier" in obj else None
        return cls(family, dim, phases, unitary, mult)


def _square_stack(x, n: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim < 2 or x.shape[-1] != x.shape[-2]:
        raise DimensionMismatch(f"expected square matrices, got shape {x.shape}")
    if n is not None and x.shape[-1] != n:
        raise DimensionMismatch(f"expected {n}x{n} input, got {x.shape[-2:]}")
    return x


def _trace(x: np.ndarray) -> np.ndarray:
    return np.trace(x, axis1=-2, axis2=-1)


def apply_reduction(n: int, x) -> np.ndarray:
    if n < 2:
        raise DimensionMismatch("reduction map needs n >= 2")
    x = _square_stack(x, n)
    return (_trace(x)[..., None, None] * np.eye(n) - x) / (n - 1)


def apply_gen_reduction(n: int, z: PhaseCollection, x) -> np.ndarray:
    if n < 2:
        raise DimensionMismatch("reduction map needs n >= 2")
    if z.n_labels != n:
        raise DimensionMismatch("phase labels must match n")
    x = _square_stack(x, n)
    diag = np.einsum("...ii->...i", x)
    out = -z.matrix() * x
    out = out + (_trace(x)[..., None] - diag)[..., None] * np.eye(n)
    return out / (n - 1)


def _r2(y: np.ndarray) -> np.ndarray:
    return _trace(y)[..., None, None] * np.eye(2) - y


def apply_gen_robertson(k: int, z: PhaseCollection, x) -> np.ndarray:
    """Generalized Robertson map on M_2k.

    Off-diagonal output block (m, l) is ``-z_ml (X_ml + R_2(X_lm)) / (2(k-1))``;
    diagonal block m is ``I_2 (Tr X - Tr X_mm) / (2(k-1))``.
    """
    if k < 2:
        raise DimensionMismatch("generalized Robertson map needs k >= 2")
    if z.n_labels != k:
        raise DimensionMismatch("phase labels must match k")
    x = np.asarray(x, dtype=complex)
    if x.ndim >= 2 and x.shape[-1] % 2:
        raise OddDimension("input dimension must be even")
    x = _square_stack(x, 2 * k)
    lead = x.shape[:-2]
    xb = x.reshape(*lead, k, 2, k, 2).swapaxes(-3, -2)       # [..., m, l, a, b]
    swapped = xb.swapaxes(-4, -3)                            # X_lm at [m, l]
    out = -z.matrix()[..., None, None] * (xb + _r2(swapped))
    tr_blocks = np.einsum("...mmaa->...m", xb)
    diag = (_trace(x)[..., None] - tr_blocks)[..., None, None] * np.eye(2)
    idx = np.arange(k)
    out[..., idx, idx, :, :] = diag
    out = out.swapaxes(-3, -2).reshape(*lead, 2 * k, 2 * k)
    return out / (2 * (k - 1))


def apply_robertson(k: int, x) -> np.ndarray:
    return apply_gen_robertson(k, PhaseCollection(k), x)


def apply_breuer_hall(u, x) -> np.ndarray:
    """Unital Breuer-Hall map  [I Tr X - X - U X^T U^dag] / (2(k-1))."""
    u = check_antisymmetric_unitary(u)
    n = u.shape[0]
    if n % 2:
        raise OddDimension("U must be 2k x 2k")
    k = n // 2
    x = _square_stack(x, n)
    twisted = u @ np.swapaxes(x, -1, -2) @ u.conj().T
    return (_trace(x)[..., None, None] * np.eye(n) - x - twisted) / (2 * (k - 1))


def apply_hadamard_multiplier(ztilde, x) -> np.ndarray:
    ztilde = mc.as_matrix(ztilde)
    x = np.asarray(x, dtype=complex)
    if x.shape[-2:] != ztilde.shape:
        raise ShapeMismatch(f"{ztilde.shape} vs {x.shape[-2:]}")
    return ztilde * x


def apply_map(spec: MapSpec, x) -> np.ndarray:
    n = spec.dim
    f = spec.family
    if f == "reduction":
        return apply_reduction(n, x)
    if f == "gen-reduction":
        return apply_gen_reduction(n, spec.phases, x)
    if f == "robertson":
        return apply_robertson(spec.k, x)
    if f == "gen-robertson":
        return apply_gen_robertson(spec.k, spec.phases, x)
    if f == "breuer-hall":
        return apply_breuer_hall(spec.unitary, x)
    if f == "hadamard-multiplier":
        return apply_hadamard_multiplier(spec.multiplier, x)
    x = _square_stack(x, n)
    if f == "transpose":
        return np.swapaxes(x, -1, -2).copy()
    if f == "identity":
        return x.copy()
    if f == "depolarizing":
        return _trace(x)[..., None, None] * np.eye(n) / n
    raise ValueError(f)


def apply_spa_map(spec: MapSpec, p: float, x) -> np.ndarray:
    """(1-p) Tr(X) I/n + p Lambda(X): the noisy mixture whose Choi matrix is the SPA operator."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    x = _square_stack(x, spec.dim)
    n = spec.dim
    return (1 - p) * _trace(x)[..., None, None] * np.eye(n) / n + p * apply_map(spec, x)


def basis_images(spec: MapSpec) -> np.ndarray:
    """Array ``L`` with ``L[i, j] = Lambda(e_ij)``."""
    n = spec.dim
    e = np.zeros((n, n, n, n), dtype=complex)
    idx = np.arange(n)
    e[idx[:, None], idx[None, :], idx[:, None], idx[None, :]] = 1.0
    return apply_map(spec, e)


def choi_matrix(spec: MapSpec) -> np.ndarray:
    """(1/n) sum_ij e_ij (x) Lambda(e_ij)."""
    return mc.from_blocks(basis_images(spec)) / spec.dim


def is_completely_positive(spec: MapSpec, tol: float = mc.TOL_PSD) -> bool:
    return mc.is_psd(choi_matrix(spec), tol)


def positivity_probe(spec: MapSpec, samples: int, seed: int) -> ProbeReport:
    """Sampled lower bound on min over unit psi of lambda_min(Lambda(|psi><psi|)).

    The 20 worst samples are then polished by alternating eigenvector descent
    on the Choi matrix.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n = spec.dim
    images = basis_images(spec)
    keep_val, keep_psi, keep_y = [], [], []
    for rng, size in chunk_rngs(seed, samples):
        psi = mc.haar_vectors(rng, size, n)
        out = np.einsum("si,sj,ijab->sab", psi, psi.conj(), images, optimize=True)
        ev, vec = np.linalg.eigh(0.5 * (out + mc.dagger(out)))
        vals = ev[:, 0]
        order = np.argsort(vals, kind="stable")[:N_POLISH]
        keep_val.append(vals[order])
        keep_psi.append(psi[order])
        keep_y.append(vec[order, :, 0])
    vals = np.concatenate(keep_val)
    psis, ys = np.concatenate(keep_psi), np.concatenate(keep_y)
    order = np.argsort(vals, kind="stable")[:N_POLISH]
    sampled_min = float(vals[order[0]])
    best = (sampled_min, psis[order[0]], ys[order[0]])
    w = mc.from_blocks(images) / n
    for idx in order:
        v, u, y = polish(w, (n, n), psis[idx].conj(), ys[idx])
        if n * v < best[0]:
            best = (n * v, u.conj(), y)
    return ProbeReport(best[0], best[1], best[2], samples, seed, sampled_min)


# Ingredients of the positivity argument for the generalized Robertson map.

def m_matrices(psis, alphas) -> np.ndarray:
    """M_ij = sqrt(a_i a_j) [|psi_i><psi_j| + s_y conj(|psi_i><psi_j|) s_y], shape (k, k, 2, 2)."""
    psis = np.asarray(psis, dtype=complex)
    alphas = np.asarray(alphas, dtype=float)
    if psis.ndim != 2 or psis.shape[1] != 2 or psis.shape[0] != alphas.shape[0]:
        raise DimensionMismatch("need k vectors in C^2 and k weights")
    if np.any(alphas < 0) or abs(alphas.sum() - 1) > 1e-12:
        raise NormalizationError("alphas must be nonnegative and sum to 1")
    if np.any(np.abs(np.linalg.norm(psis, axis=1) - 1) > 1e-12):
        raise NormalizationError("each psi_i must be a unit vector")
    outer = np.einsum("ia,jb->ijab", psis, psis.conj())
    twisted = SIGMA_Y @ outer.conj() @ SIGMA_Y
    return np.sqrt(np.outer(alphas, alphas))[..., None, None] * (outer + twisted)


def split_vector(psi, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Write a unit psi in C^2k as the direct sum of sqrt(alpha_i) psi_i."""
    psi = np.asarray(psi, dtype=complex).reshape(k, 2)
    norms = np.linalg.norm(psi, axis=1)
    alphas = norms ** 2
    alphas = alphas / alphas.sum()
    parts = np.where(norms[:, None] > 0, psi / np.where(norms > 0, norms, 1)[:, None], [1, 0])
    return parts, alphas


def schur_step(k: int, z: PhaseCollection, psi) -> dict:
    """One induction step of the positivity argument.

    Returns the Schur complement of the last diagonal block of
    2(k-1) Phi^(z)(|psi><psi|) together with the reduced instance
    2(k-2) Phi^(z')(|psi'><psi'|) on M_2(k-1) that it should equal, where
    z'_ij = (1 - a_k) z_ij + a_k z_ik conj(z_jk).

    The two agree exactly for unimodular z. Inside the disc ``excess`` =
    schur - reduced is a PSD diagonal, which is all the induction needs.
    """
    if k < 3:
        raise DimensionMismatch("the induction step needs k >= 3")
    parts, alphas = split_vector(psi, k)
    a_last = alphas[-1]
    if a_last >= 1 - 1e-12:
        raise SingularB("last weight is 1; the Schur complement is undefined")
    full = 2 * (k - 1) * apply_gen_robertson(k, z, np.outer(psi, np.conj(psi)))
    top, col, corner = full[:-2, :-2], full[:-2, -2:], full[-2:, -2:]
    schur = top - col @ np.linalg.inv(corner) @ col.conj().T
    zp = {}
    for i in range(1, k - 1):
        for j in range(i + 1, k):
            zp[(i, j)] = (1 - a_last) * z.get(i, j) + a_last * z.get(i, k) * np.conj(z.get(j, k))
    zprime = PhaseCollection(k - 1, zp)
    scale = np.sqrt(alphas[:-1] / (1 - a_last))
    psi_p = (scale[:, None] * parts[:-1]).reshape(-1)
    reduced = 2 * (k - 2) * apply_gen_robertson(k - 1, zprime, np.outer(psi_p, psi_p.conj()))
    return {"schur": schur, "reduced": reduced, "z_prime": zprime, "psi_prime": psi_p,
            "excess": schur - reduced}


def bhatia_block_check(a, b, x, tol: float = mc.TOL_PSD) -> bool:
    """[[A, X], [X^dag, B]] >= 0 with B > 0, decided by A - X B^-1 X^dag >= 0."""
    a, b, x = mc.as_matrix(a), mc.as_matrix(b), mc.as_matrix(x)
    if mc.min_eigenvalue(b) <= tol:
        raise SingularB("B must be positive definite")
    schur = a - x @ np.linalg.solve(b, x.conj().T)
    return mc.is_psd(0.5 * (schur + schur.conj().T), tol)


def breuer_hall_equivalence(k: int, z: PhaseCollection) -> dict:
    """Decide whether z_ij = z_i conj(z_j) and compare witness spectra.

    With unit diagonal the phase matrix is rank one exactly when it
    factorizes; for a Hermitian matrix with trace k that means lambda_max = k.
    """
    if not z.is_unimodular():
        raise NonUnimodularPhases("all |z_ij| must equal 1")
    full = z.matrix(diagonal=1.0)
    ev = np.linalg.eigvalsh(full)
    equivalent = bool(abs(ev[-1] - k) <= 1e-9 * k)
    site_phases = None
    if equivalent:
        # z_1 = 1 fixes the global phase; then z_i = conj(z_1i).
        site_phases = np.array([1.0] + [np.conj(z.get(1, i)) for i in range(2, k + 1)])
    spec_z = np.linalg.eigvalsh(choi_matrix(MapSpec("gen-robertson", 2 * k, z)))
    spec_bh = np.linalg.eigvalsh(choi_matrix(MapSpec("breuer-hall", 2 * k)))
    return {
        "equivalent": equivalent,
        "site_phases": site_phases,
        "witness_spectra": (spec_z, spec_bh),
        "spectra_match": bool(np.max(np.abs(spec_z - spec_bh)) <= 1e-10),
    }


def site_unitary(site_phases, block: int = 2) -> np.ndarray:
    """diag(z_1, ..., z_k) (x) I_block."""
    return np.kron(np.diag(np.asarray(site_phases, dtype=complex)), np.eye(block))


def reduction_unitary_n2(z: complex) -> np.ndarray:
    """V = diag(1, conj z) with R_2^(z)(X) = V R_2(X) V^dag for |z| = 1."""
    if not math.isclose(abs(z), 1.0, abs_tol=1e-12):
        raise NonUnimodularPhases("z must be unimodular")
    return np.diag([1.0, np.conj(z)]).astype(complex)
