"""Hypothesis property tests; each runs 100 examples (see conftest)."""
import numpy as np
from hypothesis import given
from hypothesis import strategies as st_

from ewkit import matrix_core as mc
from ewkit import states as st
from ewkit.positive_maps import MapSpec, PhaseCollection

from oracles import torus_average

seeds = st_.integers(min_value=0, max_value=2 ** 32 - 1)


def rand_x(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def random_spec(rng, family):
    if family == "gen-reduction":
        n = int(rng.integers(2, 6))
        return MapSpec(family, n, PhaseCollection.random_disc(n, rng))
    if family == "gen-robertson":
        k = int(rng.integers(2, 4))
        return MapSpec(family, 2 * k, PhaseCollection.random_disc(k, rng))
    if family in ("robertson", "breuer-hall"):
        return MapSpec(family, 2 * int(rng.integers(2, 4)))
    return MapSpec(family, int(rng.integers(2, 6)))


UNITAL = ["reduction", "gen-reduction", "robertson", "gen-robertson", "breuer-hall"]
ALL = UNITAL + ["transpose", "identity", "depolarizing"]


@given(seeds, st_.sampled_from(UNITAL))
def test_unital(seed, family):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, family)
    assert np.max(np.abs(spec.apply(np.eye(spec.dim)) - np.eye(spec.dim))) <= 1e-12


@given(seeds, st_.sampled_from(["reduction", "gen-reduction"]))
def test_trace_preserving(seed, family):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, family)
    x = rand_x(rng, spec.dim)
    assert abs(np.trace(spec.apply(x)) - np.trace(x)) <= 1e-12 * max(1.0, mc.frobenius(x))


@given(seeds, st_.sampled_from(ALL))
def test_hermiticity_preserving(seed, family):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, family)
    x = rand_x(rng, spec.dim)
    assert np.allclose(spec.apply(x.conj().T), spec.apply(x).conj().T, atol=1e-13)


@given(seeds, st_.integers(2, 4), st_.integers(2, 4))
def test_partial_transpose_involution_and_trace(seed, da, db):
    rng = np.random.default_rng(seed)
    m = mc.random_hermitian(rng, da * db)
    pt = mc.partial_transpose(m, (da, db))
    assert np.array_equal(mc.partial_transpose(pt, (da, db)), m)
    assert np.trace(pt) == np.trace(m)
    assert mc.is_hermitian(pt)


@given(seeds, st_.integers(2, 4))
def test_twirl_idempotent_trace(seed, d):
    rng = np.random.default_rng(seed)
    rho = mc.random_density(rng, d * d)
    t = st.twirl(rho, d)
    assert np.array_equal(st.twirl(t, d), t)
    assert np.trace(t) == np.trace(rho)


@given(seeds)
def test_twirl_oracle(seed):
    rng = np.random.default_rng(seed)
    rho = mc.random_density(rng, 9)
    assert np.max(np.abs(st.twirl(rho, 3) - torus_average(rho, 3))) <= 1e-10


@given(seeds, st_.integers(3, 5))
def test_ptranspose_psd_inside_disc(seed, n):
    from ewkit.witness_engine import choi_of_map
    rng = np.random.default_rng(seed)
    w = choi_of_map(MapSpec("gen-reduction", n, PhaseCollection.random_disc(n, rng)))
    assert mc.is_psd(mc.partial_transpose(w.op, (n, n)))
