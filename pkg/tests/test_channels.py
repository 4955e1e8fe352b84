import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from covcert import channels as ch
from covcert import groups, wstate
from covcert import linalg as la

seeds = st.integers(0, 2**32 - 1)


def _random_channel(d_in, d_out, k, rng):
    g = rng.standard_normal((k * d_out, d_in)) + 1j * rng.standard_normal((k * d_out, d_in))
    q, _ = np.linalg.qr(g)
    return ch.QuantumChannel(q.reshape(k, d_out, d_in), (d_in,), (d_out,))


def test_channel_validation():
    with pytest.raises(la.ShapeError):
        ch.QuantumChannel(np.eye(2)[None], (3,), (2,))
    with pytest.raises(ValueError):
        ch.QuantumChannel(2 * np.eye(2)[None], (2,), (2,))
    inst = ch.QuantumChannel(np.diag([1.0, 0.0])[None], (2,), (2,), trace_preserving=False)
    assert np.isclose(np.trace(inst(np.eye(2) / 2)), 0.5)
    with pytest.raises(ValueError):
        ch.QuantumChannel(2 * np.eye(2)[None], (2,), (2,), trace_preserving=False)


def test_apply_examples(rng):
    rho = la.random_density(3, rng)
    assert np.allclose(ch.apply(ch.identity_channel((3,)), rho), rho)
    assert np.allclose(ch.apply(ch.depolarizing_channel(3, 1.0), rho), np.eye(3) / 3)
    sigma = la.random_density(2, rng)
    assert np.allclose(ch.apply(ch.erasure_channel((3, 2), [1]), la.kron(rho, sigma)), rho)
    with pytest.raises(la.ShapeError):
        ch.apply(ch.identity_channel((3,)), np.eye(2))


@given(seeds, st.floats(0, 1), st.floats(0, 1))
def test_compose_depolarizing(seed, p, q):
    rng = np.random.default_rng(seed)
    rho = la.random_density(2, rng)
    both = ch.compose(ch.depolarizing_channel(2, p), ch.depolarizing_channel(2, q))
    ref = ch.depolarizing_channel(2, 1 - (1 - p) * (1 - q))
    assert np.allclose(both(rho), ref(rho), atol=1e-12)


def test_compose_identity_and_mismatch(rng):
    e = _random_channel(2, 3, 2, rng)
    rho = la.random_density(2, rng)
    assert np.allclose(ch.compose(ch.identity_channel((3,)), e)(rho), e(rho), atol=1e-12)
    with pytest.raises(la.ShapeError):
        ch.compose(e, e)


def test_compose_choi_matches_direct(rng):
    e = _random_channel(2, 3, 2, rng)
    n = _random_channel(3, 2, 3, rng)
    j = ch.choi_state(ch.compose(n, e)).matrix
    phi = la.proj(la.max_entangled(2))
    direct = sum(
        la.kron(np.eye(2), k2 @ k1) @ phi @ la.kron(np.eye(2), k2 @ k1).conj().T for k1 in e.kraus for k2 in n.kraus
    )
    assert np.allclose(j, direct, atol=1e-12)


def test_choi_examples():
    j = ch.choi_state(ch.identity_channel((2,))).matrix
    assert np.allclose(j, la.proj(la.max_entangled(2)))
    assert np.allclose(ch.choi_state(ch.depolarizing_channel(2, 1.0)).matrix, np.eye(4) / 4)
    inst = ch.QuantumChannel(np.diag([1.0, 0.0])[None], (2,), (2,), trace_preserving=False)
    with pytest.raises(ValueError):
        ch.choi_state(inst)


@given(seeds)
def test_choi_invariants_and_round_trip(seed):
    rng = np.random.default_rng(seed)
    e = _random_channel(2, 3, 3, rng)
    c = ch.choi_state(e)
    assert la.is_psd(c.matrix) and abs(np.trace(c.matrix) - 1) < 1e-9
    assert np.allclose(la.partial_trace(c.matrix, (2, 3), [1]), np.eye(2) / 2, atol=1e-8)
    back = ch.channel_from_choi(c)
    for i in range(2):
        for k in range(2):
            op = np.outer(np.eye(2)[i], np.eye(2)[k])
            assert np.allclose(back(op), e(op), atol=1e-9)


def test_choi_of_erased_wcode_matches_recursion():
    p = wstate.WCodeParams(3, 2, 1)
    j = ch.choi_state(ch.compose(ch.erasure_channel(p.shape, [0]), wstate.encoder(p))).matrix
    assert np.linalg.norm(j - wstate.choi_after_erasure_recursive(p).matrix) < 1e-12


def test_erasure_examples():
    e = ch.erasure_channel((2, 2), [1])
    assert np.allclose(e(la.proj(la.max_entangled(2))), np.eye(2) / 2)
    flat = e.kraus.reshape(-1, 4)
    assert np.allclose(flat.conj().T @ flat, np.eye(4), atol=1e-12)
    with pytest.raises(ValueError):
        ch.erasure_channel((2, 2), [0, 1])
    with pytest.raises(la.ShapeError):
        ch.erasure_channel((2, 2), [2])


def test_erase_after_matches_compose(rng):
    e = _random_channel(2, 12, 2, rng)
    e = ch.QuantumChannel(e.kraus, (2,), (2, 3, 2))
    for erased in ([0], [1], [0, 2], [1, 2]):
        a = ch.erase_after(e, erased)
        b = ch.compose(ch.erasure_channel(e.out_shape, erased), e)
        assert np.allclose(ch.choi_state(a).matrix, ch.choi_state(b).matrix, atol=1e-12)


def test_erasure_covariant_under_tensor_reps(rng):
    z4 = groups.cyclic_phase_rep(4, 2)
    rep2 = groups.tensor_power_rep(z4, 2)
    e = ch.erasure_channel((2, 2), [1])
    rep = ch.GroupRep(rep2.unitaries_in, z4.unitaries_in)
    assert ch.is_covariant(e, rep)[0]
    for _ in range(5):
        us = [la.random_unitary(2, rng) for _ in range(3)]
        r = ch.GroupRep([np.kron(u, u) for u in us], us)
        assert ch.is_covariant(e, r)[0]


def test_depolarizing_examples(rng):
    rho = la.random_density(3, rng)
    assert np.allclose(ch.depolarizing_channel(3, 0.0)(rho), rho)
    assert np.allclose(ch.depolarizing_channel(3, 1.0)(rho), np.eye(3) / 3)
    assert np.allclose(ch.depolarizing_channel(3, 0.3)(rho), 0.7 * rho + 0.3 * np.eye(3) / 3, atol=1e-12)
    with pytest.raises(ValueError):
        ch.depolarizing_channel(2, 1.5)


@given(seeds, st.floats(0, 1))
def test_depolarizing_covariant_for_any_rep(seed, p):
    rng = np.random.default_rng(seed)
    us = [la.random_unitary(3, rng) for _ in range(3)]
    assert ch.is_covariant(ch.depolarizing_channel(3, p), ch.GroupRep.same(us))[0]


def test_known_erasure_examples(rng):
    shape = (2, 3)
    rho = la.random_density(6, rng)
    out = ch.known_erasure_channel(shape, (0, 0))(rho)
    assert np.allclose(out, la.kron(la.proj(la.ket(0, 4)), rho))
    a, s = la.random_density(2, rng), la.random_density(3, rng)
    out = ch.known_erasure_channel(shape, (1, 0))(la.kron(a, s))
    reg = la.proj(la.ket(2, 4))
    assert np.allclose(out, la.kron(reg, la.proj([1, 0]), s))
    with pytest.raises(ValueError):
        ch.known_erasure_channel(shape, (1, 1))


def test_known_erasure_on_wcode_weights(rng):
    p = wstate.WCodeParams(4, 2, 1)
    psi = la.random_pure_state(2, rng)
    v = wstate.encoder(p).kraus[0] @ psi
    out = ch.known_erasure_channel(p.shape, (0, 1, 0, 0))(la.proj(v))
    # strip register and the reset site, compare with the mixture of |perp> and the smaller codeword
    kept = la.partial_trace(out, (16, 3, 3, 3, 3), [0, 2])
    perp = la.proj(la.ket([2, 2, 2], [3, 3, 3]))
    small = wstate.encoder(wstate.WCodeParams(3, 2)).kraus[0] @ psi
    assert np.allclose(kept, 0.25 * perp + 0.75 * la.proj(small), atol=1e-12)


def test_is_covariant_examples(rng):
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    ok, dev = ch.is_covariant(ch.unitary_channel(h), groups.z2_rep())
    assert not ok and dev > 1
    e = _random_channel(2, 2, 2, rng)
    assert ch.is_covariant(e, ch.GroupRep.same([np.eye(2)]))[0]
    with pytest.raises(la.ShapeError):
        ch.is_covariant(e, groups.s3_rep().__class__.same([np.eye(3)]))


def test_g_twirl_examples(rng):
    op = la.random_psd(4, rng)
    triv = [np.eye(2)]
    assert np.allclose(ch.g_twirl(op, triv, triv), op)
    z = groups.z2_rep().unitaries_in
    once = ch.g_twirl(op, z, z)
    assert np.allclose(ch.g_twirl(once, z, z), once, atol=1e-12)
    plus = la.proj([1, 1]) / 1
    plus = plus / np.trace(plus)
    t = ch.g_twirl(la.kron(plus.T, plus), z, z)
    zz = np.kron(np.diag([1, -1]), np.diag([1, -1]))
    hand = (la.kron(plus, plus) + zz @ la.kron(plus, plus) @ zz) / 2
    assert np.allclose(t, hand)
    with pytest.raises(ValueError):
        ch.g_twirl(op, [], [])


@given(seeds)
def test_g_twirl_output_is_invariant(seed):
    rng = np.random.default_rng(seed)
    rep = groups.s3_rep()
    op = la.random_psd(4, rng)
    t = ch.g_twirl(op, rep.unitaries_in, rep.unitaries_in)
    for u in rep.unitaries_in:
        w = np.kron(u.conj(), u)
        assert np.allclose(w @ t, t @ w, atol=1e-10)


def test_haar_pair_twirl_state():
    s = ch.haar_pair_twirl_state(2)
    assert np.allclose(s, (2 / 3) * np.eye(4) / 4 + (1 / 3) * la.proj(la.max_entangled(2)))
    for d in (2, 3, 4):
        s = ch.haar_pair_twirl_state(d)
        assert la.is_psd(s) and abs(np.trace(s) - 1) < 1e-12
    with pytest.raises(ValueError):
        ch.haar_pair_twirl_state(1)


def test_haar_pair_twirl_matches_clifford_design(rng):
    cl = groups.clifford_group_1q()
    for _ in range(3):
        psi = la.proj(la.random_pure_state(2, rng))
        assert np.allclose(ch.g_twirl(la.kron(psi.T, psi), cl, cl), ch.haar_pair_twirl_state(2), atol=1e-10)


def test_twirl_channel_is_covariant(rng):
    rep = groups.s3_rep()
    e = _random_channel(2, 2, 3, rng)
    assert not ch.is_covariant(e, rep)[0]
    assert ch.is_covariant(ch.twirl_channel(e, rep), rep, tol=1e-10)[0]


def test_group_rep_validation():
    with pytest.raises(ValueError):
        ch.GroupRep.same([np.array([[1, 1], [0, 1]])])
    bad = ch.GroupRep.same([np.eye(2), np.diag([1, 1j])])
    assert not bad.check_closure()


def test_json_round_trip(rng):
    e = _random_channel(2, 3, 2, rng)
    back = ch.channel_from_json(json.dumps(ch.channel_to_json(e)))
    assert np.allclose(back.kraus, e.kraus) and back.out_shape == e.out_shape
    rep = groups.s3_rep()
    r2 = ch.rep_from_json(json.dumps(ch.rep_to_json(rep)))
    assert np.allclose(r2.unitaries_in, rep.unitaries_in) and r2.labels == rep.labels
