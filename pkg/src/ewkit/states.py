"""State families and separability / entanglement-breaking certificates."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from . import matrix_core as mc
from .errors import (
    CertificateFailed,
    ConstructionInvalid,
    DegenerateWitness,
    MultiplierNotCP,
    NonUnimodularPhases,
    NotTracePreserving,
    ReconstructionFailure,
)
from .positive_maps import SIGMA_X, MapSpec, PhaseCollection, basis_images
from .witness_engine import Witness, choi_of_map, spa


@dataclass
class SeparableDecomposition:
    """sum_a w_a |x_a><x_a| (x) |y_a><y_a| with unit x_a, y_a and w_a > 0."""

    terms: list[tuple[float, np.ndarray, np.ndarray]] = field(default_factory=list)
    target_residual: float = np.nan

    def add(self, w: float, x, y) -> None:
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        w = float(w) * nx ** 2 * ny ** 2
        if w > 0:
            self.terms.append((w, x / nx, y / ny))

    def reconstruct(self) -> np.ndarray:
        if not self.terms:
            raise ValueError("empty decomposition")
        w = np.array([t[0] for t in self.terms])
        v = np.array([np.kron(t[1], t[2]) for t in self.terms])
        return np.einsum("a,ai,aj->ij", w, v, v.conj())

    def residual(self, target) -> float:
        return mc.frobenius(self.reconstruct() - target)

    def scaled(self, factor: float) -> "SeparableDecomposition":
        return SeparableDecomposition([(w * factor, x, y) for w, x, y in self.terms])

    def terms_are_product(self, tol: float = 1e-12) -> bool:
        """Every term has positive weight, unit factors, and operator-Schmidt rank one."""
        for w, x, y in self.terms:
            if not w > 0 or abs(np.linalg.norm(x) - 1) > tol or abs(np.linalg.norm(y) - 1) > tol:
                return False
            v = np.kron(x, y)
            term = np.outer(v, v.conj())
            da, db = x.size, y.size
            realigned = term.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
            sv = np.linalg.svd(realigned, compute_uv=False)
            if sv[1:].max(initial=0.0) > tol * sv[0]:
                return False
        return True

    def to_json(self) -> dict:
        vec = lambda v: [[float(c.real), float(c.imag)] for c in v]
        return {
            "terms": [{"w": float(w), "x": vec(x), "y": vec(y)} for w, x, y in self.terms],
            "target_residual": float(self.target_residual),
        }


# Standard states

def max_entangled(n: int) -> np.ndarray:
    """P+ = (1/n) sum_ij e_ij (x) e_ij."""
    if n < 2:
        raise ValueError("n must be >= 2")
    v = np.eye(n, dtype=complex).reshape(-1) / np.sqrt(n)
    return np.outer(v, v)


def isotropic(n: int, p: float) -> np.ndarray:
    return p * max_entangled(n) + (1 - p) * np.eye(n * n) / n ** 2


def isotropic_detection_threshold(w: Witness) -> float:
    """The p at which Tr(W rho_p) changes sign; Tr(W rho_p) is affine in p."""
    n = w.dims[0]
    at1 = float(np.real(np.trace(w.op @ max_entangled(n))))
    at0 = w.normalized_trace / n ** 2
    slope = at1 - at0
    if abs(slope) <= 1e-14:
        raise DegenerateWitness("Tr(W rho_p) does not depend on p")
    return -at0 / slope


# PPT entangled states

def _robertson_witness_blocks(k: int, z: PhaseCollection) -> np.ndarray:
    """Blocks W_ij = Phi(e_ij)/(2k) of W = sum_ij e_ij (x) W_ij."""
    return basis_images(MapSpec("gen-robertson", 2 * k, z)) / (2 * k)


READINGS = ("literal", "completed-diagonal")


def _assemble_ppt_candidate(k: int, z: PhaseCollection, reading: str) -> np.ndarray:
    n = 2 * k
    wb = _robertson_witness_blocks(k, z)
    s = 1.0 / (4 * k * (k - 1))
    rho = np.zeros((n, n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            bi, bj = i // 2, j // 2
            if i == j:
                if reading == "literal":
                    rho[i, i] = -wb[i, i]
                else:
                    proj = np.zeros((n, n))
                    proj[2 * bi, 2 * bi] = proj[2 * bi + 1, 2 * bi + 1] = 1.0
                    rho[i, i] = wb[i, i] + proj / (2 * k)
            elif (i + j) % 2 == 0:
                rho[i, j] = -wb[i, j]
            elif bi == bj:
                continue  # (2m-1, 2m) and its mirror
            else:
                rho[i, j, i, j] = z.get(bi + 1, bj + 1) * s
    return mc.from_blocks(rho) / 3.0


def _ppt_checks(rho: np.ndarray, w: Witness, k: int, tol: float) -> dict:
    n = 2 * k
    target = -1.0 / (24 * k * (k - 1))
    trace = float(np.real(np.trace(rho)))
    herm = mc.is_hermitian(rho)
    psd = mc.min_eigenvalue(rho) if herm else -np.inf
    ppt = mc.min_eigenvalue(mc.partial_transpose(rho, (n, n))) if herm else -np.inf
    value = float(np.real(np.trace(w.op @ rho)))
    return {
        "positivity": {"passed": bool(psd >= -tol), "margin": float(psd)},
        "ppt": {"passed": bool(ppt >= -tol), "margin": float(ppt)},
        "detection": {"passed": bool(value < -tol and abs(value - target) <= 1e-10),
                      "value": value, "expected": target},
        "trace": {"passed": abs(trace - 1) <= 1e-12, "value": trace},
    }


@dataclass(frozen=True)
class PptState:
    op: np.ndarray
    k: int
    z: PhaseCollection
    detection_target: Witness
    reading: str
    certificates: dict
    discrepancies: tuple = ()

    def to_json(self) -> dict:
        out = mc.matrix_to_json(self.op)
        out["dim_a"] = out["dim_b"] = 2 * self.k
        c = self.certificates
        out["certificates"] = {
            "psd": c["positivity"]["margin"],
            "ppt": c["ppt"]["margin"],
            "detection": c["detection"]["value"],
        }
        out["reading"] = self.reading
        out["discrepancies"] = list(self.discrepancies)
        return out


def ppt_candidates(k: int, z: PhaseCollection, tol: float = mc.TOL_PSD) -> dict:
    """Every reading of the block rule with its certificate results."""
    w = choi_of_map(MapSpec("gen-robertson", 2 * k, z))
    out = {}
    for reading in READINGS:
        rho = _assemble_ppt_candidate(k, z, reading)
        out[reading] = (rho, _ppt_checks(rho, w, k, tol))
    return out


def ppt_entangled_state(k: int, z: PhaseCollection | None = None, tol: float = mc.TOL_PSD) -> PptState:
    """PPT entangled state detected by the generalized Robertson witness.

    Off-diagonal blocks follow the three-case block rule with N = 1/3. Taken
    literally, the rule rho_ii = -W_ii makes every diagonal block negative and
    the trace -1/3. The ``completed-diagonal`` reading uses
    rho_ii = W_ii + P_b/(2k), P_b the projector onto the 2x2 block holding i;
    the added part sits where W has zero expectation, so Tr(W rho) keeps the
    value -1/(24k(k-1)) and the trace becomes exactly 1. The literal reading
    is always tried first and its failures are recorded in ``discrepancies``.
    """
    z = PhaseCollection(k) if z is None else z
    if k < 2:
        raise ValueError("k must be >= 2")
    if not z.is_unimodular():
        raise NonUnimodularPhases("all |z_ij| must equal 1")
    w = choi_of_map(MapSpec("gen-robertson", 2 * k, z))
    discrepancies = []
    last_fail = None
    for reading in READINGS:
        rho = _assemble_ppt_candidate(k, z, reading)
        checks = _ppt_checks(rho, w, k, tol)
        failed = [name for name, c in checks.items() if not c["passed"]]
        if not failed:
            return PptState(rho, k, z, w, reading, checks, tuple(discrepancies))
        discrepancies.append({"reading": reading, "failed": failed, "checks": checks})
        last_fail = failed[0]
    raise ConstructionInvalid(last_fail, f"no reading of the block rule passes: {discrepancies}")


# Separability of the SPA of the generalized reduction witness

def a0_operator(n: int) -> np.ndarray:
    """A_0 = sum_ij e_ij (x) e_ij + sum_{i != j} e_ii (x) e_jj."""
    v = np.eye(n, dtype=complex).reshape(-1)
    a0 = np.outer(v, v)
    for i in range(n):
        for j in range(n):
            if i != j:
                a0[i * n + j, i * n + j] += 1
    return a0


def a0_pairwise_ansatz(n: int) -> SeparableDecomposition:
    """Average of (e_k + e^{it} e_l) (x) (e_k + e^{-it} e_l) over t in {0, pi/2, pi, 3pi/2}, summed over k < l.

    Exact for n = 2 only; kept as the brute-force reference for that case.
    """
    eye = np.eye(n, dtype=complex)
    dec = SeparableDecomposition()
    for k in range(n):
        for l in range(k + 1, n):
            for t in range(4):
                ph = 1j ** t
                dec.add(0.25, eye[k] + ph * eye[l], eye[k] + np.conj(ph) * eye[l])
    return dec


def a0_separable_decomposition(n: int, tol: float = 1e-10) -> SeparableDecomposition:
    """A_0 as an average of |x><x| (x) |conj x><conj x| over cube-root phase vectors.

    With x = sum_k w^{t_k} e_k, w = exp(2 pi i/3), the entry <ab|.|cd> of the
    average survives only if {a, d} = {b, c} as multisets, i.e. exactly the
    |aa><cc| and |ab><ab| entries of A_0. Pairwise four-phase averages can not
    be used for n >= 3: they count each |kk><kk| term n - 1 times.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    omega = np.exp(2j * np.pi / 3)
    dec = SeparableDecomposition()
    count = 3 ** (n - 1)
    for t in itertools.product(range(3), repeat=n - 1):
        x = omega ** np.array((0,) + t)
        dec.add(1.0 / count, x, x.conj())
    res = dec.residual(a0_operator(n))
    if res > tol:
        raise ReconstructionFailure(f"A_0 residual {res:.3e}")
    dec.target_residual = res
    return dec


def hadamard_pushforward(dec: SeparableDecomposition, ztilde, tol: float = 1e-14) -> SeparableDecomposition:
    """Image of ``dec`` under id (x) (Ztilde o .), Ztilde = sum_r g_r g_r^dag.

    Ztilde o |y><y| = sum_r |g_r o y><g_r o y|, so each term splits into at
    most rank(Ztilde) product terms.
    """
    ztilde = mc.as_matrix(ztilde)
    ev, vec = mc.eig_hermitian(ztilde)
    if ev[0] < -mc.TOL_PSD:
        raise MultiplierNotCP(f"multiplier has eigenvalue {ev[0]:.3e}")
    keep = ev > tol * max(1.0, ev[-1])
    gs = (vec[:, keep] * np.sqrt(ev[keep])).T
    out = SeparableDecomposition()
    for w, x, y in dec.terms:
        for g in gs:
            out.add(w, x, g * y)
    return out


def _check_separable_target(dec: SeparableDecomposition, target: np.ndarray, dims, tol: float) -> float:
    res = dec.residual(target)
    if res > tol:
        raise ReconstructionFailure(f"residual {res:.3e} exceeds {tol:.1e}")
    if not dec.terms_are_product():
        raise ReconstructionFailure("a term is not a product projector")
    if not mc.is_psd(mc.partial_transpose(dec.reconstruct(), dims)):
        raise ReconstructionFailure("reconstruction is not PPT")
    dec.target_residual = res
    return res


def spa_separability_certificate_reduction(n: int, z: PhaseCollection | None = None,
                                           tol: float = 1e-8) -> SeparableDecomposition:
    """Explicit product decomposition of the SPA operator of the generalized reduction witness.

    n(n-1) (|lambda_min| I + W) = (id (x) Ztilde o .)(A_0) + sum_i e_ii (x) (I - e_ii)
    with Ztilde = s I - Z and s = lambda_max(Z) = n(n-1)|lambda_min|.
    """
    z = PhaseCollection(n) if z is None else z
    if not z.is_unimodular():
        raise NonUnimodularPhases("all |z_ij| must equal 1")
    zmat = z.matrix()
    s = float(np.linalg.eigvalsh(zmat)[-1])
    ztilde = s * np.eye(n) - zmat
    dec = hadamard_pushforward(a0_separable_decomposition(n), ztilde)
    eye = np.eye(n)
    for i in range(n):
        for j in range(n):
            if i != j:
                dec.add(1.0, eye[i], eye[j])
    w = choi_of_map(MapSpec("gen-reduction", n, z))
    result = spa(w)
    dec = dec.scaled(result.p_star / (n * (n - 1)))
    _check_separable_target(dec, result.spa_operator, (n, n), tol)
    return dec


# Twirls

def twirl(rho, d: int | None = None) -> np.ndarray:
    """Average of (U_x (x) conj U_x) rho (...)^dag over the diagonal torus of U(d).

    Keeps <ij|rho|kl> when (i = k and j = l) or (i = j and k = l).
    """
    rho = mc.as_matrix(rho)
    d = int(round(np.sqrt(rho.shape[0]))) if d is None else d
    return rho * _twirl_mask(d)


def _twirl_mask(d: int) -> np.ndarray:
    i, j, k, l = np.ix_(*(np.arange(d),) * 4)
    keep = ((i == k) & (j == l)) | ((i == j) & (k == l))
    return keep.reshape(d * d, d * d)


def block_twirl(rho, k: int) -> np.ndarray:
    """Twirl over the sub-torus U = diag(e^{i t_1}, e^{-i t_1}, ..., e^{i t_k}, e^{-i t_k}).

    Entry <ab|rho|cd> survives iff the block charges of a - b - c + d cancel,
    where index 2m-1 carries +1 and index 2m carries -1 on block m.
    """
    rho = mc.as_matrix(rho)
    d = 2 * k
    charge = np.zeros((d, k))
    for a in range(d):
        charge[a, a // 2] = 1 if a % 2 == 0 else -1
    tot = (charge[:, None, None, None, :] - charge[None, :, None, None, :]
           - charge[None, None, :, None, :] + charge[None, None, None, :, :])
    keep = np.all(tot == 0, axis=-1).reshape(d * d, d * d)
    return rho * keep


def phase_average(rho, phase_grid, d: int, conj_second: bool = True) -> np.ndarray:
    """Brute-force average of (U (x) conj U) rho (U (x) conj U)^dag, U = diag(exp(i x))."""
    rho = mc.as_matrix(rho)
    acc = np.zeros_like(rho)
    count = 0
    for x in phase_grid:
        u = np.exp(1j * np.asarray(x, dtype=float))
        v = np.kron(u, u.conj() if conj_second else u)
        acc += v[:, None] * rho * v.conj()[None, :]
        count += 1
    return acc / count


# Phi_6 with z_ij = -1

PHI6_PSI = np.array([
    [1, 0, 1, 0, 1, 0],
    [1, 0, 0, 1, 0, 1],
    [0, 1, 1, 0, 0, 1],
    [0, 1, 0, 1, 1, 0],
], dtype=float)
PHI6_PHI = np.array([
    [1, 0, 1, 0, 1, 0],
    [1, 0, 0, -1, 0, -1],
    [0, 1, -1, 0, 0, 1],
    [0, 1, 0, 1, -1, 0],
], dtype=float)


def phi6_parts() -> tuple[SeparableDecomposition, SeparableDecomposition, np.ndarray]:
    """V1 = sum |psi_i psi_i><.|, V2 = sum |psi_i phi_i><.|, and the local flip I_3 (x) sigma_x."""
    v1, v2 = SeparableDecomposition(), SeparableDecomposition()
    for p, f in zip(PHI6_PSI, PHI6_PHI):
        v1.add(1.0, p, p)
        v2.add(1.0, p, f)
    return v1, v2, np.kron(np.eye(3), SIGMA_X)


def phi6_spa_target(z: PhaseCollection | None = None) -> np.ndarray:
    z = PhaseCollection.uniform(3, -1.0) if z is None else z
    return spa(choi_of_map(MapSpec("gen-robertson", 6, z))).spa_operator


def _fit_twirled(target: np.ndarray, parts: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray, float]:
    off = ~np.eye(target.shape[0], dtype=bool)
    cols = [np.concatenate([p[off].real, p[off].imag]) for p in parts]
    rhs = np.concatenate([target[off].real, target[off].imag])
    coef, _ = nnls(np.stack(cols, axis=1), rhs)
    d = target - sum(c * p for c, p in zip(coef, parts))
    return coef, d, float(np.linalg.norm(d[off]))


def phi6_spa_decomposition(target=None, tol: float = 1e-8) -> dict:
    """target = a T(V1) + b T((I (x) S) V2 (I (x) S)) + D with a, b >= 0 and D diagonal PSD.

    ``S = I_3 (x) sigma_x``. The full-torus twirl is tried first; it erases
    the <i jbar|W|j ibar> entries of the witness (jbar the partner of j in its
    2x2 block), so the fit cannot close. The twirl over the block sub-torus
    keeps them and closes the decomposition exactly. Both twirls average local
    unitaries of the form U (x) conj U, so either maps separable operators to
    separable operators.
    """
    target = phi6_spa_target() if target is None else mc.as_matrix(target)
    v1, v2, flip = phi6_parts()
    big_flip = np.kron(np.eye(6), flip)
    r1, r2 = v1.reconstruct(), big_flip @ v2.reconstruct() @ big_flip
    attempts = []
    for name, tw in (("full-torus", lambda r: twirl(r, 6)), ("block-torus", lambda r: block_twirl(r, 3))):
        parts = [tw(r1), tw(r2)]
        coef, d, res = _fit_twirled(target, parts)
        d_min = float(np.min(np.diag(d).real))
        ok = res <= tol and d_min >= -tol
        attempts.append({"twirl": name, "coefficients": coef.tolist(), "residual": res,
                         "d_min": d_min, "passed": bool(ok)})
        if ok:
            return {
                "V1": v1, "V2": v2, "D": np.diag(np.diag(d)), "residual": res,
                "coefficients": coef, "twirl": name, "attempts": attempts,
                "twirled_parts": parts,
            }
    raise CertificateFailed(f"no nonnegative combination leaves a diagonal PSD remainder: {attempts}")


# Holevo form

def holevo_form(dec: SeparableDecomposition, n: int, target=None, tol: float = 1e-6) -> dict:
    """Measure-and-prepare form of the channel whose Choi matrix ``dec`` reconstructs.

    Each term (w, x, y) gives F = n w |conj x><conj x| and R = |y><y|, so that
    Lambda(X) = sum R Tr(F X).
    """
    if not dec.terms:
        raise NotTracePreserving("empty decomposition")
    f_list = [n * w * np.outer(x.conj(), x) for w, x, _ in dec.terms]
    r_list = [np.outer(y, y.conj()) for _, _, y in dec.terms]
    resolution = mc.frobenius(sum(f_list) - np.eye(n))
    if resolution > tol:
        raise NotTracePreserving(f"sum of F deviates from I by {resolution:.3e}")
    choi = dec.reconstruct() if target is None else mc.as_matrix(target)
    expected = n * mc.blocks(choi, (n, n))
    fs, rs = np.array(f_list), np.array(r_list)
    # Tr(F e_ij) = F_ji
    induced = np.einsum("aji,axy->ijxy", fs, rs)
    channel_residual = float(np.max(np.abs(induced - expected)))
    return {
        "R_list": r_list,
        "F_list": f_list,
        "resolution_residual": resolution,
        "channel_residual": channel_residual,
    }
