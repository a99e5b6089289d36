"""Optimality certificates from spanning product vectors, and their failure for |z| < 1.

A witness W is optimal when the product vectors x (x) y with
<x (x) y|W|x (x) y> = 0 span the whole space. The candidate vectors are

    f_kl = (e_k + w e_l) (x) (e_k + w e_l)
    g_kl = (e_k + i w e_l) (x) (e_k - i w e_l)       w = exp(-i alpha_kl / 2)
    e_k (x) e_k

for k < l, with z_kl = exp(i alpha_kl).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import matrix_core as mc
from .errors import DimensionMismatch, PhaseOnBoundary
from .positive_maps import MapSpec, PhaseCollection
from .witness_engine import Witness, block_positivity_probe, choi_of_map


@dataclass(frozen=True)
class ProductVectorSet:
    dim: int
    xs: np.ndarray
    ys: np.ndarray
    labels: tuple[str, ...]

    @property
    def vectors(self) -> np.ndarray:
        return np.einsum("ni,nj->nij", self.xs, self.ys).reshape(len(self.labels), -1)

    def __len__(self) -> int:
        return len(self.labels)


def spanning_vectors(n: int, alphas: Mapping[tuple[int, int], float] | None = None) -> ProductVectorSet:
    """The n^2 product vectors f_kl, g_kl, e_k(x)e_k; ``alphas`` keyed by 1-based k < l."""
    alphas = alphas or {}
    eye = np.eye(n, dtype=complex)
    xs, ys, labels = [], [], []
    for k in range(n):
        for l in range(k + 1, n):
            w = np.exp(-0.5j * alphas.get((k + 1, l + 1), 0.0))
            a = eye[k] + w * eye[l]
            xs.append(a)
            ys.append(a)
            labels.append(f"f_{k + 1},{l + 1}")
            xs.append(eye[k] + 1j * w * eye[l])
            ys.append(eye[k] - 1j * w * eye[l])
            labels.append(f"g_{k + 1},{l + 1}")
    for k in range(n):
        xs.append(eye[k])
        ys.append(eye[k])
        labels.append(f"diag_{k + 1}")
    return ProductVectorSet(n, np.array(xs), np.array(ys), tuple(labels))


def witness_angles(spec: MapSpec) -> dict[tuple[int, int], float]:
    """Angles alpha_kl over vector indices 1..n for the witness of ``spec``.

    For the generalized Robertson map a pair of indices in different 2x2
    blocks inherits the angle of the block pair; pairs inside one block get 0.
    """
    n = spec.dim
    if spec.family == "gen-reduction":
        return spec.phases.angles()
    if spec.family == "gen-robertson":
        out = {}
        for k in range(1, n + 1):
            for l in range(k + 1, n + 1):
                bk, bl = (k + 1) // 2, (l + 1) // 2
                out[(k, l)] = float(np.angle(spec.phases.get(bk, bl))) if bk != bl else 0.0
        return out
    return {}


def span_rank(vectors: np.ndarray, rel_cut: float = 1e-9) -> int:
    gram = vectors.conj() @ vectors.T
    ev = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    if ev[-1] <= 0:
        return 0
    return int(np.sum(ev > rel_cut * ev[-1]))


def optimality_certificate(w: Witness, vs: ProductVectorSet, tol: float = 1e-10) -> dict:
    """One-directional: ``certified`` proves optimality, failure proves nothing."""
    if vs.dim != w.dims[0] or w.dims[0] != w.dims[1]:
        raise DimensionMismatch("vector set does not match the witness")
    v = vs.vectors
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    expect = np.einsum("ni,ij,nj->n", v.conj(), w.op, v).real
    bound = tol * mc.frobenius(w.op)
    failing = [lab for lab, e in zip(vs.labels, expect) if abs(e) > bound]
    rank = span_rank(v)
    all_zero = not failing
    return {
        "all_zero": all_zero,
        "max_abs_expectation": float(np.max(np.abs(expect))),
        "span_rank": rank,
        "certified": bool(all_zero and rank == vs.dim ** 2),
        "failing": failing,
    }


def certify_witness(w: Witness, tol: float = 1e-10) -> dict:
    """Optimality certificate with angles read off the witness's source map."""
    alphas = witness_angles(w.source) if w.source is not None else {}
    return optimality_certificate(w, spanning_vectors(w.dims[0], alphas), tol)


def correction_operator(n: int, k: int, l: int, coefficient: float) -> np.ndarray:
    """coefficient * (e_kk (x) e_ll + e_ll (x) e_kk), 1-based k, l."""
    e = lambda a: mc.basis_matrix(a - 1, a - 1, n)
    return coefficient * (np.kron(e(k), e(l)) + np.kron(e(l), e(k)))


def non_optimality_correction(n: int, z: PhaseCollection, pair: tuple[int, int],
                              coefficient: str = "tight", samples: int = 4000,
                              seed: int = 0) -> dict:
    """Subtract Q_kl/(n(n-1)) from the generalized reduction witness and test the rest.

    ``coefficient="tight"`` uses 1 - |z_kl|, the largest multiple of
    e_kk(x)e_ll + e_ll(x)e_kk keeping the partial transpose PSD.
    ``coefficient="quadratic"`` uses 1 - |z_kl|^2, which overshoots whenever
    0 < |z_kl| < 1.
    """
    k, l = sorted(pair)
    zkl = z.get(k, l)
    if abs(abs(zkl) - 1) <= 1e-12:
        raise PhaseOnBoundary(f"|z_{k}{l}| = 1, nothing can be subtracted")
    c = {"tight": 1 - abs(zkl), "quadratic": 1 - abs(zkl) ** 2}[coefficient]
    q = correction_operator(n, k, l, c)
    w = choi_of_map(MapSpec("gen-reduction", n, z))
    reduced = w.op - q / (n * (n - 1))
    pt_min = mc.min_eigenvalue(mc.partial_transpose(reduced, (n, n)))
    probe = block_positivity_probe(Witness(reduced, (n, n)), samples, seed)
    lam = mc.min_eigenvalue(reduced)
    q_invariant = bool(np.array_equal(mc.partial_transpose(q, (n, n)), q))
    still = pt_min >= -mc.TOL_PSD and probe.min_found >= -mc.TOL_PSD and lam < -mc.TOL_PSD
    return {
        "Q": q,
        "coefficient": c,
        "q_ptranspose_invariant": q_invariant,
        "pt_min": float(pt_min),
        "block_min": float(probe.min_found),
        "lambda_min": float(lam),
        "still_witness": bool(still),
    }
