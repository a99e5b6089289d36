"""Entanglement witnesses from positive maps and their spectral analysis."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matrix_core as mc
from .errors import DimensionMismatch, NonUnimodularPhases
from .positive_maps import MapSpec, PhaseCollection, choi_matrix
from .probing import ProbeReport, minimize_product_expectation


@dataclass(frozen=True)
class Witness:
    """Hermitian operator on C^n (x) C^n with the map it came from."""

    op: np.ndarray
    dims: tuple[int, int]
    source: MapSpec | None = None
    normalized_trace: float = field(default=np.nan)

    def __post_init__(self):
        op = mc.as_matrix(self.op)
        dims = (int(self.dims[0]), int(self.dims[1]))
        if op.shape != (dims[0] * dims[1],) * 2:
            raise DimensionMismatch(f"operator shape {op.shape} does not match dims {dims}")
        mc._check_hermitian(op)
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "normalized_trace", float(np.trace(op).real))

    @property
    def n(self) -> int:
        return self.dims[0]

    def to_json(self) -> dict:
        out = mc.matrix_to_json(self.op)
        out["dim_a"], out["dim_b"] = self.dims
        out["source"] = None if self.source is None else self.source.to_json()
        out["trace"] = self.normalized_trace
        return out

    @classmethod
    def from_json(cls, obj) -> "Witness":
        op = mc.matrix_from_json(obj)
        n = int(round(np.sqrt(op.shape[0])))
        dims = (int(obj.get("dim_a", n)), int(obj.get("dim_b", n)))
        src = obj.get("source")
        return cls(op, dims, None if src is None else MapSpec.from_json(src))


@dataclass(frozen=True)
class SpaResult:
    lambda_min: float
    p_star: float
    spa_operator: np.ndarray
    psd_margin: float
    already_positive: bool = False
    separable_cert: object | None = None

    def to_json(self) -> dict:
        return {
            "lambda_min": self.lambda_min,
            "p_star": self.p_star,
            "spa_psd_margin": self.psd_margin,
        }


def choi_of_map(spec: MapSpec) -> Witness:
    n = spec.dim
    return Witness(choi_matrix(spec), (n, n), spec)


def min_eigenvalue(w: Witness) -> float:
    return mc.min_eigenvalue(w.op)


def spectrum(w: Witness) -> np.ndarray:
    return mc.eigvals_hermitian(w.op)


def gen_reduction_lambda_min_via_Z(n: int, z: PhaseCollection) -> float:
    """-lambda_max(Z) / (n(n-1)), Z the zero-diagonal phase matrix.

    On span{|ii>} the witness equals -Z/(n(n-1)); on every |ij>, i != j, it is
    diagonal with value 1/(n(n-1)), which never wins.
    """
    if not z.is_unimodular():
        raise NonUnimodularPhases("all |z_ij| must equal 1")
    if z.n_labels != n:
        raise DimensionMismatch("phase labels must match n")
    return -float(np.linalg.eigvalsh(z.matrix())[-1]) / (n * (n - 1))


def spa_operator(w: Witness, p: float) -> np.ndarray:
    d = w.dims[0] * w.dims[1]
    return (1 - p) / d * np.eye(d) + p * w.op


def p_star_from_lambda(lam: float, n: int) -> float:
    return 1.0 / (1.0 + abs(lam) * n * n)


def spa(w: Witness) -> SpaResult:
    """Largest p with (1-p) I/n^2 + p W >= 0, and that operator.

    A positive semidefinite W gives p* = 1 with ``already_positive`` set.
    """
    if abs(w.normalized_trace - 1) > 1e-10:
        raise ValueError(f"SPA needs Tr W = 1, got {w.normalized_trace}")
    lam = min_eigenvalue(w)
    if lam >= 0:
        return SpaResult(lam, 1.0, w.op.copy(), lam, already_positive=True)
    n = w.dims[0]
    if w.dims[0] != w.dims[1]:
        raise DimensionMismatch("SPA is defined here for n x n witnesses")
    p = p_star_from_lambda(lam, n)
    op = spa_operator(w, p)
    margin = mc.min_eigenvalue(op)
    if abs(margin) > mc.TOL_PSD:
        raise RuntimeError(f"SPA operator is not on the PSD boundary (lambda_min = {margin:.3e})")
    return SpaResult(lam, p, op, margin)


def reduction_ptranspose_decomposition(n: int, z: PhaseCollection) -> list[tuple[float, np.ndarray]]:
    """(1/(n(n-1)), P_ij) for i < j, whose sum is the partial transpose of the witness.

    P_ij = e_ii(x)e_jj + e_jj(x)e_ii - z_ij e_ij(x)e_ji - conj(z_ij) e_ji(x)e_ij.
    """
    if z.n_labels != n:
        raise DimensionMismatch("phase labels must match n")
    w = 1.0 / (n * (n - 1))
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            zij = z.get(i + 1, j + 1)
            e = lambda a, b: mc.basis_matrix(a, b, n)
            p = (np.kron(e(i, i), e(j, j)) + np.kron(e(j, j), e(i, i))
                 - zij * np.kron(e(i, j), e(j, i)) - np.conj(zij) * np.kron(e(j, i), e(i, j)))
            out.append((w, p))
    return out


def psi_vector(n: int, i: int, j: int, zij: complex) -> np.ndarray:
    """e_i (x) e_j - conj(z_ij) e_j (x) e_i (0-based i, j)."""
    v = np.zeros(n * n, dtype=complex)
    v[i * n + j] = 1.0
    v[j * n + i] = -np.conj(zij)
    return v


def block_positivity_probe(w: Witness, samples: int, seed: int) -> ProbeReport:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    val, sampled, x, y = minimize_product_expectation(w.op, w.dims, samples, seed)
    return ProbeReport(val, x, y, samples, seed, sampled)


def cluster_spectrum(values, tol: float = 1e-9) -> list[tuple[float, int]]:
    """Group sorted eigenvalues whose consecutive gaps are at most ``tol``."""
    vals = np.sort(np.asarray(values, dtype=float))
    groups: list[list[float]] = []
    for v in vals:
        if groups and v - groups[-1][-1] <= tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    return [(float(np.mean(g)), len(g)) for g in groups]


def robertson_spectrum_profile(k: int, z: PhaseCollection | None = None, tol: float = 1e-9) -> dict:
    z = PhaseCollection(k) if z is None else z
    w = choi_of_map(MapSpec("gen-robertson", 2 * k, z))
    ev = spectrum(w)
    clusters = cluster_spectrum(ev, tol)
    return {
        "negatives": [(v, m) for v, m in clusters if v < -tol],
        "positives": [(v, m) for v, m in clusters if v > tol],
        "zero_count": sum(m for v, m in clusters if abs(v) <= tol),
        "total": int(ev.size),
        "trace": w.normalized_trace,
        "eigen_sum": float(ev.sum()),
    }


def indecomposability_certificate(w: Witness, rho, tol: float = mc.TOL_PSD) -> dict:
    """A witness detecting a PPT state cannot be decomposable."""
    rho = mc.as_matrix(rho)
    if abs(np.trace(rho).real - 1) > 1e-10:
        raise ValueError("rho must have unit trace")
    psd = mc.min_eigenvalue(rho)
    ppt = mc.min_eigenvalue(mc.partial_transpose(rho, w.dims))
    value = float(np.real(np.trace(w.op @ rho)))
    is_ppt = psd >= -tol and ppt >= -tol
    return {
        "is_ppt": bool(is_ppt),
        "psd_margin": float(psd),
        "ppt_margin": float(ppt),
        "detection_value": value,
        "certified": bool(is_ppt and value < -tol),
    }
