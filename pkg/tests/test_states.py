import json

import numpy as np
import pytest

from ewkit import matrix_core as mc
from ewkit import states as st
from ewkit.errors import CertificateFailed, ConstructionInvalid, DegenerateWitness, MultiplierNotCP, NonUnimodularPhases, NotTracePreserving
from ewkit.positive_maps import MapSpec, PhaseCollection, reduction_unitary_n2
from ewkit.witness_engine import Witness, choi_of_map, spa

from oracles import block_torus_average, torus_average


def test_max_entangled():
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(st.max_entangled(2), np.outer(v, v))
    for n in range(2, 7):
        p = st.max_entangled(n)
        assert np.trace(p @ p).real == pytest.approx(1)
    assert np.allclose(choi_of_map(MapSpec("identity", 3)).op, st.max_entangled(3))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_isotropic_threshold_matches_spa(n):
    w = choi_of_map(MapSpec("reduction", n))
    p = st.isotropic_detection_threshold(w)
    assert p == pytest.approx(1 / (n + 1), abs=1e-12)
    assert p == pytest.approx(spa(w).p_star, abs=1e-12)
    assert np.trace(w.op @ st.isotropic(n, 0)).real == pytest.approx(w.normalized_trace / n ** 2)
    assert np.trace(w.op @ st.isotropic(n, 1)).real == pytest.approx(-1 / n)


def test_isotropic_degenerate():
    with pytest.raises(DegenerateWitness):
        st.isotropic_detection_threshold(Witness(np.eye(4) / 4, (2, 2)))


@pytest.mark.parametrize("k", [2, 3])
def test_ppt_state_certified(rng, k):
    for z in (PhaseCollection(k), PhaseCollection.uniform(k, -1), PhaseCollection.random_unimodular(k, rng)):
        s = st.ppt_entangled_state(k, z)
        c = s.certificates
        assert s.reading == "completed-diagonal"
        assert c["positivity"]["margin"] >= -1e-10 and c["ppt"]["margin"] >= -1e-10
        assert c["detection"]["value"] == pytest.approx(-1 / (24 * k * (k - 1)), abs=1e-10)
        assert np.trace(s.op).real == pytest.approx(1, abs=1e-12)


def test_ppt_literal_reading_fails():
    cands = st.ppt_candidates(2, PhaseCollection(2))
    rho, checks = cands["literal"]
    assert not checks["positivity"]["passed"]
    assert checks["trace"]["value"] == pytest.approx(-1 / 3)
    s = st.ppt_entangled_state(2)
    assert s.discrepancies[0]["reading"] == "literal"
    assert "positivity" in s.discrepancies[0]["failed"]


def test_ppt_state_fails_loudly(monkeypatch):
    monkeypatch.setattr(st, "READINGS", ("literal",))
    with pytest.raises(ConstructionInvalid) as info:
        st.ppt_entangled_state(2)
    assert info.value.check == "positivity"


def test_ppt_state_errors():
    with pytest.raises(NonUnimodularPhases):
        st.ppt_entangled_state(2, PhaseCollection(2, {(1, 2): 0.5}))


def test_ppt_state_json():
    obj = json.loads(json.dumps(st.ppt_entangled_state(2).to_json()))
    assert set(obj["certificates"]) == {"psd", "ppt", "detection"}
    assert obj["rows"] == 16


def test_a0_pairwise_ansatz_only_at_n2():
    assert st.a0_pairwise_ansatz(2).residual(st.a0_operator(2)) <= 1e-12
    assert st.a0_pairwise_ansatz(3).residual(st.a0_operator(3)) > 1


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_a0_decomposition(n):
    dec = st.a0_separable_decomposition(n)
    assert dec.target_residual <= 1e-10
    assert dec.terms_are_product()
    assert mc.is_psd(mc.partial_transpose(st.a0_operator(n), (n, n)))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_spa_separability(rng, n):
    for z in (PhaseCollection(n), PhaseCollection.random_unimodular(n, rng)):
        dec = st.spa_separability_certificate_reduction(n, z)
        target = spa(choi_of_map(MapSpec("gen-reduction", n, z))).spa_operator
        assert dec.residual(target) <= 1e-8 and dec.terms_are_product()


def test_spa_separability_n2_unitary_route(rng):
    zval = np.exp(1j * rng.uniform(0, 2 * np.pi))
    z = PhaseCollection(2, {(1, 2): zval})
    base = st.spa_separability_certificate_reduction(2, PhaseCollection(2))
    v = reduction_unitary_n2(zval)
    routed = st.SeparableDecomposition()
    for w, x, y in base.terms:
        routed.add(w, x, v @ y)
    direct = st.spa_separability_certificate_reduction(2, z)
    assert mc.frobenius(routed.reconstruct() - direct.reconstruct()) <= 1e-12


def test_hadamard_pushforward_rejects_non_psd():
    with pytest.raises(MultiplierNotCP):
        st.hadamard_pushforward(st.a0_separable_decomposition(2), np.array([[1, 2], [2, 1]]))


def test_spa_separability_requires_unimodular():
    with pytest.raises(NonUnimodularPhases):
        st.spa_separability_certificate_reduction(3, PhaseCollection(3, {(1, 2): 0.5}))


def test_twirl_examples(rng):
    rho = mc.random_density(rng, 9)
    t = st.twirl(rho, 3)
    assert np.array_equal(st.twirl(t, 3), t)
    assert np.trace(t) == np.trace(rho)
    assert np.max(np.abs(t - torus_average(rho, 3))) <= 1e-10
    p = st.max_entangled(3)
    assert np.array_equal(st.twirl(p, 3), p)


def test_block_twirl_oracle(rng):
    rho = mc.random_density(rng, 16)
    assert np.max(np.abs(st.block_twirl(rho, 2) - block_torus_average(rho, 2))) <= 1e-10
    b = st.block_twirl(rho, 2)
    assert np.array_equal(st.block_twirl(b, 2), b)
    # the block sub-torus is smaller, so it keeps everything the full twirl keeps
    assert np.array_equal(st.block_twirl(st.twirl(rho, 4), 2), st.twirl(rho, 4))


def test_phase_average_helper(rng):
    rho = mc.random_density(rng, 4)
    grid = [(a, b) for a in 2 * np.pi * np.arange(5) / 5 for b in 2 * np.pi * np.arange(5) / 5]
    assert np.allclose(st.phase_average(rho, grid, 2), st.twirl(rho, 2), atol=1e-12)


def test_phi6_decomposition():
    res = st.phi6_spa_decomposition()
    assert res["twirl"] == "block-torus"
    assert res["residual"] <= 1e-8
    assert np.min(np.diag(res["D"]).real) >= -1e-10
    assert np.allclose(res["coefficients"], [spa(choi_of_map(MapSpec("gen-robertson", 6, PhaseCollection.uniform(3, -1)))).p_star / 24] * 2)
    full = res["attempts"][0]
    assert full["twirl"] == "full-torus" and not full["passed"]
    assert res["V1"].terms_are_product() and res["V2"].terms_are_product()
    for part in res["twirled_parts"]:
        assert mc.is_psd(mc.partial_transpose(part, (6, 6)))
    target = st.phi6_spa_target()
    rebuilt = sum(c * p for c, p in zip(res["coefficients"], res["twirled_parts"])) + res["D"]
    assert mc.frobenius(rebuilt - target) <= 1e-8


def test_phi6_full_twirl_fails_on_witness_itself():
    w = choi_of_map(MapSpec("gen-robertson", 6, PhaseCollection.uniform(3, -1))).op
    with pytest.raises(CertificateFailed):
        st.phi6_spa_decomposition(target=w)


def test_holevo_depolarizing():
    dec = st.SeparableDecomposition()
    eye = np.eye(2)
    for i in range(2):
        for j in range(2):
            dec.add(0.25, eye[i], eye[j])
    target = choi_of_map(MapSpec("depolarizing", 2)).op
    assert dec.residual(target) <= 1e-14
    h = st.holevo_form(dec, 2, target)
    assert h["resolution_residual"] <= 1e-12 and h["channel_residual"] <= 1e-12
    x = np.array([[0.3, 0.1j], [-0.1j, 0.7]])
    out = sum(r * np.trace(f @ x) for r, f in zip(h["R_list"], h["F_list"]))
    assert np.allclose(out, np.trace(x) * np.eye(2) / 2)


def test_holevo_spa_channel():
    dec = st.spa_separability_certificate_reduction(3, PhaseCollection(3))
    h = st.holevo_form(dec, 3, spa(choi_of_map(MapSpec("reduction", 3))).spa_operator)
    assert h["channel_residual"] <= 1e-8 and h["resolution_residual"] <= 1e-8


def test_holevo_errors():
    with pytest.raises(NotTracePreserving):
        st.holevo_form(st.SeparableDecomposition(), 2)
    dec = st.SeparableDecomposition()
    dec.add(1.0, [1, 0], [1, 0])
    with pytest.raises(NotTracePreserving):
        st.holevo_form(dec, 2)


def test_separable_json():
    dec = st.a0_separable_decomposition(2)
    obj = json.loads(json.dumps(dec.to_json()))
    assert set(obj) == {"terms", "target_residual"} and set(obj["terms"][0]) == {"w", "x", "y"}
