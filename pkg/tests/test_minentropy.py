import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from covcert import linalg as la
from covcert import minentropy as me
from covcert import wstate
from covcert.channels import compose, erasure_channel, choi_state

seeds = st.integers(0, 2**32 - 1)


def test_examples(rng):
    assert abs(me.hmin(la.proj(la.max_entangled(2)), 2, 2).hmin + 1) < 1e-7
    sigma = la.random_density(3, rng)
    prod = la.kron(la.proj(la.random_pure_state(2, rng)), sigma)
    assert abs(me.hmin(prod, 2, 3).hmin) < 1e-7
    mixed = la.kron(np.eye(2) / 2, sigma)
    res = me.hmin(mixed, 2, 3)
    assert abs(res.hmin - 1) < 1e-7
    assert np.allclose(res.witness_X, sigma / 2, atol=1e-6)


@pytest.mark.parametrize("d", [2, 3])
def test_assembled_program_optima(d):
    assert abs(me.phi(np.eye(d * d) / d**2, d, d) - 1 / d) < 1e-7
    assert abs(me.phi(la.proj(la.max_entangled(d)), d, d) - d) < 1e-7


def test_witness_feasible(rng):
    sig = la.random_density(6, rng)
    res = me.hmin(sig, 3, 2)
    assert la.is_psd(res.witness_X, tol=1e-7)
    assert la.is_psd(la.kron(np.eye(3), res.witness_X) - sig, tol=1e-7)
    assert abs(np.trace(res.witness_X).real - res.phi) < 1e-12
    assert abs(res.hmin + math.log2(res.phi)) < 1e-12


def test_support_reduction_on_rank_deficient(rng):
    v = la.random_density(2, rng, rank=1)
    rho = la.random_density(2, rng)
    res = me.hmin(la.kron(rho, v), 2, 2)
    assert res.reduced_dim == 1
    # X = lambda_max(rho) v is optimal
    assert abs(res.phi - np.linalg.eigvalsh(rho)[-1]) < 1e-7


def test_zero_and_errors():
    res = me.hmin(np.zeros((4, 4)), 2, 2)
    assert res.phi == 0 and res.hmin == math.inf
    with pytest.raises(la.ShapeError):
        me.hmin(np.eye(4), 2, 3)
    with pytest.raises(ValueError):
        me.hmin(np.diag([1.0, -1, 0, 0]), 2, 2)


@given(seeds, st.floats(0.1, 10))
def test_scaling(seed, c):
    k = la.random_psd(4, np.random.default_rng(seed))
    assert abs(me.phi(c * k, 2, 2) - c * me.phi(k, 2, 2)) <= 1e-7 * max(1, c * me.phi(k, 2, 2))


@given(seeds)
def test_monotone(seed):
    rng = np.random.default_rng(seed)
    k2 = la.random_psd(6, rng)
    k1 = k2 + la.random_psd(6, rng, rank=2)
    assert me.phi(k1, 2, 3) >= me.phi(k2, 2, 3) - 1e-7


@given(seeds, st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)]))
def test_bounds(seed, dims):
    da, db = dims
    h = me.hmin(la.random_density(da * db, np.random.default_rng(seed)), da, db).hmin
    assert -math.log2(da) - 1e-6 <= h <= math.log2(da) + 1e-6


def test_decompose_zero_m(rng):
    lm = la.random_psd(3, rng)
    assert me.phi_decompose(0.7, lm, 1.0, np.zeros((6, 6)), 2) == pytest.approx(0.7 * np.trace(lm).real)


def test_decompose_wcode():
    p = wstate.WCodeParams(3, 2, 1)
    j = choi_state(compose(erasure_channel(p.shape, [0]), wstate.encoder(p))).matrix
    # J = (1/(d n)) I (x) |d..d><d..d| + (1 - 1/n) J(E^(n-1)) on the kept factors
    perp = la.proj(la.ket([2, 2], [3, 3]))
    rest = wstate.choi_encoder(2, 2)
    assert np.allclose(j, la.kron(np.eye(2), perp) / 6 + (2 / 3) * rest, atol=1e-12)
    val = me.phi_decompose(1 / 6, perp, 2 / 3, rest, 2)
    assert abs(val - 1.5) < 1e-7
    assert abs(me.phi(j, 2, 9) - 1.5) < 1e-7


@given(seeds)
def test_decompose_matches_direct(seed):
    rng = np.random.default_rng(seed)
    l1, l2 = rng.uniform(0.1, 2, size=2)
    lm, m = la.random_psd(3, rng), la.random_psd(6, rng)
    direct = me.phi(l1 * la.kron(np.eye(2), lm) + l2 * m, 2, 3)
    assert abs(me.phi_decompose(l1, lm, l2, m, 2) - direct) <= 1e-6 * direct


def test_decompose_errors(rng):
    with pytest.raises(ValueError):
        me.phi_decompose(-1, np.eye(2), 1, np.eye(4), 2)
    with pytest.raises(ValueError):
        me.phi_decompose(1, -np.eye(2), 1, np.eye(4), 2)


def test_solver_error_on_iteration_cap(rng):
    with pytest.raises(me.SolverError):
        me.hmin(la.random_density(4, rng), 2, 2, max_iter=1)
