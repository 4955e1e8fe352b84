"""Approximate error-correction certificates for U(d)-covariant codes.

For an encoder ``E: L -> P`` and noise ``N: P -> P'`` that are both covariant
under the full unitary group on ``L``, the best worst-case error any decoder can
reach is ``epsilon_min = (d - Phi)/(d + 1)`` where ``Phi = 2**-H_min(L|P')`` of
the Choi state ``J(N o E)``. A query ``epsilon`` is correctable iff
``Phi >= d (1 - c epsilon)`` with ``c = (d + 1)/d``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from . import sdp, wstate
from .channels import (
    QuantumChannel,
    choi_state,
    compose,
    covariance_deviation,
    erase_after,
    identity_channel,
)
from .linalg import (
    ShapeError,
    dag,
    hermitian_basis,
    kron,
    partial_trace,
    permute_factors,
    random_unitary,
    real_to_complex,
    support_isometry,
)
from .minentropy import SolverError, hmin as hmin_sdp

SLACK = 1e-7
COVARIANCE_TOL = 1e-8


class CovarianceError(ValueError):
    pass


@dataclass
class CertReport:
    hmin_bits: float
    phi: float
    d_L: int
    c: float
    epsilon_min: float
    epsilon: float | None = None
    threshold_bits: float | None = None
    verdict: str | None = None
    covariance_check: str = "asserted"
    covariance_deviation: float | None = None
    solver_gap: float = 0.0
    kkt_residual: float = 0.0
    iterations: int = 0
    path: str = "sdp"
    erased: list[int] | None = None

    @property
    def correctable(self) -> bool | None:
        return None if self.verdict is None else self.verdict == "correctable"

    def to_dict(self) -> dict:
        return _round(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _round(obj):
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return str(obj)
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def epsilon_from_phi(phi: float, d: int) -> float:
    """``(d - phi)/(d + 1)``, clipped into ``[0, d/(d+1)]`` when solver noise pushes it just outside."""
    eps = (d - phi) / (d + 1)
    hi = d / (d + 1)
    if eps < -SLACK or eps > hi + SLACK:
        raise SolverError(f"Phi = {phi} is outside the admissible range [0, {d}]")
    return min(max(eps, 0.0), hi)


def threshold_bits(epsilon: float, d: int) -> float | None:
    """``-log2(d (1 - c epsilon))``; None once ``c epsilon >= 1`` (every code is then correctable)."""
    arg = d * (1 - (d + 1) / d * epsilon)
    return None if arg <= 0 else -math.log2(arg)


def verdict_for(phi: float, d: int, epsilon: float) -> str:
    _check_epsilon(epsilon)
    need = d * (1 - (d + 1) / d * epsilon)
    return "correctable" if phi >= need - SLACK else "not_correctable"


def _check_epsilon(epsilon):
    if epsilon is not None and not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon = {epsilon} must lie in [0, 1]")


# -- covariance sampling -----------------------------------------------------------


def default_lift(u: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    """Physical action of a logical ``U`` on a product space: ``U (+) 1`` on every factor.

    A factor of dimension ``d_L`` gets ``U`` itself.
    """
    d = u.shape[0]
    parts = []
    for dim in shape:
        if dim < d:
            raise ShapeError(f"cannot lift a {d}-dimensional unitary to a factor of dimension {dim}")
        blk = np.eye(dim, dtype=complex)
        blk[:d, :d] = u
        parts.append(blk)
    return kron(*parts)


def sample_covariance(
    encoder: QuantumChannel,
    noise: QuantumChannel,
    k: int,
    seed: int = 0,
    lift: Callable[[np.ndarray, Sequence[int]], np.ndarray] = default_lift,
) -> float:
    """Largest deviation from covariance over ``k`` seeded Haar-random logical unitaries.

    Both the encoder (``L -> P``) and the composite ``N o E`` (``L -> P'``)
    are checked, so noise covariance is tested on the code image.
    """
    return _sample(encoder, compose(noise, encoder), k, seed, lift)


def _sample(encoder, comp, k, seed, lift) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(k):
        u = random_unitary(encoder.d_in, rng)
        for ch in (encoder, comp):
            w = lift(u, ch.out_shape)
            worst = max(worst, covariance_deviation(ch, u, lambda ks, w=w: w @ ks))
    return worst


# -- core evaluation ---------------------------------------------------------------


def _phi_of_channel(ch: QuantumChannel, gap_tol: float, max_iter: int):
    j = choi_state(ch)
    return hmin_sdp(j.matrix, j.in_dim, j.out_dim, gap_tol=gap_tol, max_iter=max_iter)


def certify(
    encoder: QuantumChannel,
    noise: QuantumChannel,
    epsilon: float | None = None,
    verify_covariance: int = 0,
    seed: int = 0,
    lift: Callable = default_lift,
    gap_tol: float = 1e-8,
    max_iter: int = 100,
) -> CertReport:
    """Decide epsilon-correctability of ``noise o encoder`` with one min-entropy program.

    Covariance of both maps is assumed; ``verify_covariance=k`` samples ``k``
    random unitaries and raises :class:`CovarianceError` on a violation.
    """
    _check_epsilon(epsilon)
    if encoder.d_out != noise.d_in:
        raise ShapeError(f"encoder outputs {encoder.out_shape} but noise takes {noise.in_shape}")
    return _certify(encoder, compose(noise, encoder), epsilon, verify_covariance, seed, lift, gap_tol, max_iter)


def _certify(encoder, comp, epsilon, verify_covariance=0, seed=0, lift=default_lift, gap_tol=1e-8, max_iter=100):
    _check_epsilon(epsilon)
    check, dev = "asserted", None
    if verify_covariance:
        dev = _sample(encoder, comp, verify_covariance, seed, lift)
        if dev > COVARIANCE_TOL:
            raise CovarianceError(f"covariance violated by {dev:.3e} on a sampled unitary")
        check = "sampled-pass"
    d = encoder.d_in
    res = _phi_of_channel(comp, gap_tol, max_iter)
    rep = _report(res.phi, d, epsilon)
    rep.covariance_check, rep.covariance_deviation = check, dev
    rep.solver_gap, rep.kkt_residual, rep.iterations = res.solver_gap, res.kkt_residual, res.iterations
    return rep


def _report(phi: float, d: int, epsilon: float | None, eps_min: float | None = None) -> CertReport:
    return CertReport(
        hmin_bits=-math.log2(phi) if phi > 0 else math.inf,
        phi=phi,
        d_L=d,
        c=(d + 1) / d,
        epsilon_min=epsilon_from_phi(phi, d) if eps_min is None else eps_min,
        epsilon=epsilon,
        threshold_bits=None if epsilon is None else threshold_bits(epsilon, d),
        verdict=None if epsilon is None else verdict_for(phi, d, epsilon),
    )


def epsilon_min(encoder: QuantumChannel, noise: QuantumChannel, **kw) -> float:
    return certify(encoder, noise, None, **kw).epsilon_min


def certify_erasure_transversal(
    encoder: QuantumChannel, erased: Sequence[int], epsilon: float | None = None, **kw
) -> CertReport:
    """Erasure of the (0-based) factors in ``erased`` followed by :func:`certify`."""
    erased = sorted(set(int(e) for e in erased))
    rep = _certify(encoder, erase_after(encoder, erased), epsilon, **kw)
    rep.erased = erased
    return rep


def exact_ek_gap(encoder: QuantumChannel, erased: Sequence[int], **kw) -> float:
    """``H_min(L|P') + log2 d_L``; zero exactly when the erasure is perfectly correctable."""
    rep = certify_erasure_transversal(encoder, erased, None, **kw)
    return rep.hmin_bits + math.log2(rep.d_L)


def certify_wstate(
    params: wstate.WCodeParams,
    erased: Sequence[int] | None = None,
    epsilon: float | None = None,
    path: str = "auto",
    **kw,
) -> CertReport:
    """W-code under erasure of ``erased`` (default: the first ``N_e`` sites).

    ``path="sdp"`` builds the code densely and solves the program; ``"analytic"``
    uses the closed form. ``"auto"`` picks the program below the dense cap.
    """
    _check_epsilon(epsilon)
    erased = list(range(params.N_e)) if erased is None else sorted(set(int(e) for e in erased))
    if len(erased) != params.N_e:
        raise ValueError("erased set size must equal N_e")
    if any(not 0 <= e < params.n for e in erased):
        raise ValueError("erased site out of range")
    if path == "auto":
        path = "sdp" if params.d_L != math.inf and params.dim <= wstate.DENSE_CAP else "analytic"
    if path == "sdp":
        if params.dim > wstate.DENSE_CAP:
            raise ValueError(f"dense path needs (d_L+1)^n <= {wstate.DENSE_CAP}")
        if not erased:
            rep = certify(wstate.encoder(params), _identity_like(params), epsilon, **_sdp_kw(kw))
        else:
            rep = certify_erasure_transversal(wstate.encoder(params), erased, epsilon, **_sdp_kw(kw))
    elif path == "analytic":
        if kw.get("verify_covariance"):
            raise ValueError("covariance sampling needs the dense path")
        d = int(params.d_L)
        rep = _report(wstate.analytic_phi(params), d, epsilon, wstate.analytic_epsilon_min(params))
        rep.covariance_check = "asserted"
    else:
        raise ValueError(f"unknown path {path!r}")
    rep.path = path
    rep.erased = erased
    return rep


def _identity_like(params):
    return identity_channel(params.shape)


def _sdp_kw(kw):
    return {k: kw[k] for k in ("verify_covariance", "seed", "lift", "gap_tol", "max_iter") if k in kw}


# -- independent decoder oracle ----------------------------------------------------


@dataclass
class OracleResult:
    value: float
    decoder_choi: np.ndarray
    solver_gap: float
    kkt_residual: float
    iterations: int


def decoder_choi_oracle(
    encoder: QuantumChannel, noise: QuantumChannel, gap_tol: float = 1e-8, max_iter: int = 100, full: bool = False
):
    """``max_D <phi+| (id (x) D o N o E)(phi+) |phi+>`` over all decoders ``D: P' -> L``.

    The variable is the decoder's (unnormalized) Choi matrix ``C`` on ``P' (x) L``
    with ``tr_L C = I``; ``P'`` is first compressed onto the support of the
    channel's output on the maximally mixed input.
    """
    ch = compose(noise, encoder)
    j = choi_state(ch)
    d, ds = j.in_dim, j.out_dim
    w = support_isometry(partial_trace(j.matrix, (d, ds), [0]))
    r = w.shape[1]
    lift = kron(np.eye(d), w)
    jr = dag(lift) @ j.matrix @ lift
    obj = permute_factors(jr, (d, r), (1, 0)).conj() / d
    basis = hermitian_basis(r)
    eye_l = np.eye(d)
    a = np.array([sdp.hermitian_block(kron(bk, eye_l)) for bk in basis])
    b = np.array([np.trace(bk).real for bk in basis])
    prob = sdp.SdpProblem([-sdp.hermitian_block(obj)], [a], b)
    sol = sdp.solve(prob, gap_tol=gap_tol, feas_tol=gap_tol, max_iter=max_iter)
    if sol.status != "optimal":
        raise SolverError(f"decoder oracle ended with status {sol.status}")
    c_red = real_to_complex(sol.X[0])
    lift_out = kron(w, eye_l)
    res = OracleResult(-sol.primal_value, lift_out @ c_red @ dag(lift_out), sol.gap, sol.kkt_residual, sol.iterations)
    return res if full else res.value
