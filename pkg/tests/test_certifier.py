import json
import math

import numpy as np
import pytest

from covcert import certifier as cf
from covcert import linalg as la
from covcert import wstate as ws
from covcert.channels import QuantumChannel, depolarizing_channel, identity_channel, unitary_channel


def _w(n, d=2):
    return ws.encoder(ws.WCodeParams(n, d))


def test_headline_analytic():
    rep = cf.certify_wstate(ws.WCodeParams(100, 2, 1), epsilon=0.005)
    assert rep.path == "analytic" and rep.verdict == "correctable"
    assert abs(rep.epsilon_min - 0.005) <= 1e-12
    assert cf.certify_wstate(ws.WCodeParams(100, 2, 1), epsilon=0.004).verdict == "not_correctable"


def test_wcode_sdp_value():
    rep = cf.certify_erasure_transversal(_w(3), [0])
    assert abs(rep.epsilon_min - 1 / 6) < 1e-6
    assert abs(rep.phi - 1.5) < 1e-6


def test_identity_encoder_full_depolarizing():
    rep = cf.certify(identity_channel((2,)), depolarizing_channel(2, 1.0), 0.4)
    assert rep.verdict == "not_correctable"
    assert abs(rep.epsilon_min - 0.5) < 1e-7
    assert abs(rep.phi - 0.5) < 1e-7


@pytest.mark.parametrize("n", [2, 3])
def test_noiseless_is_perfect(n):
    enc = _w(n)
    rep = cf.certify(enc, identity_channel(enc.out_shape), 0.0)
    assert rep.verdict == "correctable" and rep.epsilon_min < 1e-7
    assert abs(cf.epsilon_min(enc, identity_channel(enc.out_shape))) < 1e-7


def test_erasure_transversal_examples():
    enc = _w(4)
    assert cf.certify_erasure_transversal(enc, [0], 0.2).verdict == "correctable"
    assert cf.certify_erasure_transversal(enc, [0], 0.1).verdict == "not_correctable"
    rep = cf.certify_erasure_transversal(enc, [0, 1], 0.25)
    assert rep.verdict == "correctable" and abs(rep.epsilon_min - 0.25) < 1e-6
    assert rep.erased == [0, 1]


def test_erased_position_does_not_matter():
    enc = _w(4)
    a = cf.certify_erasure_transversal(enc, [0]).epsilon_min
    b = cf.certify_erasure_transversal(enc, [2]).epsilon_min
    assert abs(a - b) < 1e-7


def test_exact_ek_gap():
    assert abs(cf.exact_ek_gap(_w(3), [0]) - (1 - math.log2(1.5))) < 1e-6
    enc = _w(2)
    assert abs(cf.certify(enc, identity_channel(enc.out_shape)).hmin_bits + 1) < 1e-7


@pytest.mark.parametrize("n,d", [(3, 2), (4, 2), (3, 3)])
def test_boundary_strict(n, d):
    enc = _w(n, d)
    eps = cf.certify_erasure_transversal(enc, [0]).epsilon_min
    assert cf.certify_erasure_transversal(enc, [0], eps).verdict == "correctable"
    assert cf.certify_erasure_transversal(enc, [0], eps - 1e-4).verdict == "not_correctable"


def test_high_epsilon_always_correctable():
    rep = cf.certify(identity_channel((2,)), depolarizing_channel(2, 1.0), 0.9)
    assert rep.verdict == "correctable" and rep.threshold_bits is None
    assert cf.threshold_bits(0.0, 2) == pytest.approx(-1.0)


@pytest.mark.parametrize("eps", [-0.1, 1.5])
def test_epsilon_range(eps):
    with pytest.raises(ValueError):
        cf.certify(identity_channel((2,)), identity_channel((2,)), eps)


def test_shape_mismatch():
    with pytest.raises(la.ShapeError):
        cf.certify(identity_channel((2,)), identity_channel((3,)))


def test_covariance_sampling():
    enc = _w(3)
    rep = cf.certify_erasure_transversal(enc, [0], 0.2, verify_covariance=4, seed=1)
    assert rep.covariance_check == "sampled-pass" and rep.covariance_deviation < 1e-8
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    with pytest.raises(cf.CovarianceError):
        cf.certify(identity_channel((2,)), unitary_channel(h), verify_covariance=3)
    assert cf.certify(identity_channel((2,)), unitary_channel(h)).covariance_check == "asserted"


def test_sampling_is_seeded():
    enc = _w(2)
    from covcert.channels import erase_after

    a = cf.sample_covariance(enc, identity_channel(enc.out_shape), 3, seed=5)
    b = cf.sample_covariance(enc, identity_channel(enc.out_shape), 3, seed=5)
    assert a == b
    assert erase_after(enc, [0]).d_out == 3


def test_certify_wstate_paths():
    p = ws.WCodeParams(3, 2, 1)
    a = cf.certify_wstate(p, path="sdp")
    b = cf.certify_wstate(p, path="analytic")
    assert a.path == "sdp" and b.path == "analytic"
    assert abs(a.epsilon_min - b.epsilon_min) < 1e-6
    assert cf.certify_wstate(p).path == "sdp"
    assert cf.certify_wstate(ws.WCodeParams(3, 2, 0), epsilon=0).verdict == "correctable"
    with pytest.raises(ValueError):
        cf.certify_wstate(p, erased=[0, 1])
    with pytest.raises(ValueError):
        cf.certify_wstate(ws.WCodeParams(9, 2, 1), path="sdp")
    with pytest.raises(ValueError):
        cf.certify_wstate(p, path="other")


def test_report_json():
    rep = cf.certify_wstate(ws.WCodeParams(100, 2, 1), epsilon=0.005)
    data = json.loads(rep.to_json())
    assert data["epsilon_min"] == 0.005 and data["verdict"] == "correctable"
    assert data["c"] == 1.5 and data["d_L"] == 2
    assert rep.correctable is True
    assert cf.certify_wstate(ws.WCodeParams(100, 2, 1)).correctable is None


def test_oracle_examples():
    enc = _w(2)
    assert abs(cf.decoder_choi_oracle(enc, identity_channel(enc.out_shape)) - 1) < 1e-6
    assert abs(cf.decoder_choi_oracle(identity_channel((2,)), depolarizing_channel(2, 1.0)) - 0.25) < 1e-6
    from covcert.channels import erasure_channel

    enc3 = _w(3)
    val = cf.decoder_choi_oracle(enc3, erasure_channel(enc3.out_shape, [0]))
    assert abs(val - 0.75) < 1e-6


def test_oracle_decoder_is_a_channel():
    from covcert.channels import erasure_channel

    enc = _w(2)
    res = cf.decoder_choi_oracle(enc, erasure_channel(enc.out_shape, [1]), full=True)
    c = res.decoder_choi
    assert la.is_psd(c, tol=1e-7)
    marg = la.partial_trace(c, (3, 2), [1])
    w = la.support_isometry(marg)
    assert np.allclose(w.conj().T @ marg @ w, np.eye(w.shape[1]), atol=1e-7)


def test_epsilon_from_phi_range():
    with pytest.raises(cf.SolverError):
        cf.epsilon_from_phi(-1.0, 2)
    assert cf.epsilon_from_phi(2 + 1e-9, 2) == 0.0


def test_default_lift():
    u = la.random_unitary(2, np.random.default_rng(0))
    m = cf.default_lift(u, (3, 2))
    assert np.allclose(m, la.kron(ws.lift(u), u))
    with pytest.raises(la.ShapeError):
        cf.default_lift(la.random_unitary(3, np.random.default_rng(0)), (2,))


def test_noise_channel_object():
    # a noise map with a single Kraus operator behaves like any other channel
    enc = identity_channel((2,))
    noise = QuantumChannel(np.eye(2)[None], (2,), (2,))
    assert cf.certify(enc, noise).epsilon_min < 1e-7
