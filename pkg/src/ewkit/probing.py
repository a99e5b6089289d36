"""Sampling plus alternating-eigenvector search over product vectors.

Both the positivity probe of a map and the block-positivity probe of a
witness reduce to minimizing <x (x) y|W|x (x) y> over unit x, y. Random
samples are drawn in fixed-size chunks, each chunk with its own generator
seeded by ``(seed, chunk_index)``, so results depend only on ``seed`` and
``samples``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matrix_core import haar_vectors

CHUNK = 2048
N_POLISH = 20
POLISH_ITERS = 50


@dataclass(frozen=True)
class ProbeReport:
    min_found: float
    worst_input: np.ndarray
    worst_partner: np.ndarray | None = None
    samples: int = 0
    seed: int = 0
    sampled_min: float = field(default=np.inf)

    def to_json(self) -> dict:
        def vec(v):
            return None if v is None else [[float(z.real), float(z.imag)] for z in v]

        return {
            "min_found": float(self.min_found),
            "sampled_min": float(self.sampled_min),
            "samples": int(self.samples),
            "seed": int(self.seed),
            "worst_input": vec(self.worst_input),
            "worst_partner": vec(self.worst_partner),
        }


def chunk_rngs(seed: int, samples: int):
    """Yield ``(rng, size)`` per chunk; independent of how chunks are scheduled."""
    done, c = 0, 0
    while done < samples:
        size = min(CHUNK, samples - done)
        yield np.random.default_rng([int(seed), c]), size
        done += size
        c += 1


def product_expectations(w: np.ndarray, dims, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    da, db = dims
    wt = w.reshape(da, db, da, db)
    return np.einsum("ni,nj,ijkl,nk,nl->n", xs.conj(), ys.conj(), wt, xs, ys, optimize=True).real


def polish(w: np.ndarray, dims, x: np.ndarray, y: np.ndarray, iters: int = POLISH_ITERS):
    """Alternately replace y and x by the lowest eigenvector of the reduced operator."""
    da, db = dims
    wt = w.reshape(da, db, da, db)
    val = float(np.real(np.einsum("i,j,ijkl,k,l->", x.conj(), y.conj(), wt, x, y)))
    for _ in range(iters):
        ry = np.einsum("i,ijkl,k->jl", x.conj(), wt, x)
        ev, vec = np.linalg.eigh(0.5 * (ry + ry.conj().T))
        y = vec[:, 0]
        rx = np.einsum("j,ijkl,l->ik", y.conj(), wt, y)
        ev, vec = np.linalg.eigh(0.5 * (rx + rx.conj().T))
        x = vec[:, 0]
        new = float(ev[0])
        if abs(val - new) <= 1e-15 * max(1.0, abs(val)):
            val = new
            break
        val = new
    return val, x, y


def minimize_product_expectation(w: np.ndarray, dims, samples: int, seed: int,
                                 sampler=None) -> tuple[float, float, np.ndarray, np.ndarray]:
    """Return ``(min_found, sampled_min, x, y)`` for the product-vector minimum of ``w``.

    ``sampler(rng, size)`` may supply custom ``(xs, ys)`` batches; Haar-random
    pairs are used otherwise.
    """
    da, db = dims
    best_vals, best_x, best_y = [], [], []
    for rng, size in chunk_rngs(seed, samples):
        if sampler is None:
            xs, ys = haar_vectors(rng, size, da), haar_vectors(rng, size, db)
        else:
            xs, ys = sampler(rng, size)
        vals = product_expectations(w, dims, xs, ys)
        keep = np.argsort(vals, kind="stable")[:N_POLISH]
        best_vals.append(vals[keep])
        best_x.append(xs[keep])
        best_y.append(ys[keep])
    vals = np.concatenate(best_vals)
    xs, ys = np.concatenate(best_x), np.concatenate(best_y)
    order = np.argsort(vals, kind="stable")[:N_POLISH]
    sampled_min = float(vals[order[0]])
    best = (np.inf, None, None)
    for idx in order:
        v, x, y = polish(w, dims, xs[idx], ys[idx])
        if v < best[0]:
            best = (v, x, y)
    return min(best[0], sampled_min), sampled_min, best[1], best[2]
