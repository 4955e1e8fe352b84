"""State conversion under G-covariant operations for a finite group G.

The fidelity of distillation ``F_eta(rho) = max_E tr[eta E(rho)]`` over
covariant channels ``E: A -> B`` equals ``2**-H_min(B|A)`` of the twirled
operator ``Pi^G(eta^T (x) rho)``; pure-target conversion questions reduce to it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import sdp
from .channels import GroupRep, QuantumChannel, g_twirl, matrix_from_json, matrix_to_json, rep_from_json, rep_to_json, twirl_channel
from .linalg import ShapeError, as_matrix, dag, hermitian_basis, is_psd, kron, proj, real_to_complex
from .minentropy import SolverError, hmin

SLACK = 1e-7


def _density(m, name="state") -> np.ndarray:
    m = as_matrix(m) if np.ndim(m) == 2 else proj(np.asarray(m, dtype=complex))
    if not is_psd(m) or abs(np.trace(m).real - 1) > 1e-9:
        raise ValueError(f"{name} must be a density operator")
    return m


def _pure(psi, name="target") -> np.ndarray:
    m = _density(psi, name)
    if abs(np.trace(m @ m).real - 1) > 1e-9:
        raise ValueError(f"{name} must be a pure state")
    return m


def _check_dims(eta, rho, rep: GroupRep):
    if rho.shape[0] != rep.d_in or eta.shape[0] != rep.d_out:
        raise ShapeError("state dimensions do not match the representation")


def twirled_operator(eta, rho, rep: GroupRep) -> np.ndarray:
    """``|G|^-1 sum_g (conj(V_g) (x) U_g)(eta^T (x) rho)(...)^dag`` on ``B (x) A``."""
    eta, rho = as_matrix(eta), as_matrix(rho)
    _check_dims(eta, rho, rep)
    return g_twirl(kron(eta.T, rho), rep.unitaries_out, rep.unitaries_in)


def fidelity_of_distillation(eta, rho, rep: GroupRep, gap_tol: float = 1e-8, full: bool = False):
    """``2**-H_min(B|A)`` of the twirled ``eta^T (x) rho``; ``eta`` may be mixed."""
    eta, rho = _density(eta, "eta"), _density(rho, "rho")
    _check_dims(eta, rho, rep)
    res = hmin(twirled_operator(eta, rho, rep), rep.d_out, rep.d_in, gap_tol=gap_tol)
    return res if full else res.phi


@dataclass
class OracleValue:
    value: float
    choi: np.ndarray
    solver_gap: float
    kkt_residual: float


def _invariance_rows(rep: GroupRep, basis: np.ndarray) -> np.ndarray:
    # coordinates of (I - T)(B_m) for the Choi twirl T on A (x) B
    us = [np.kron(u.conj(), v) for u, v in zip(rep.unitaries_in, rep.unitaries_out)]
    rows = []
    for bm in basis:
        tw = sum(w @ bm @ dag(w) for w in us) / len(us)
        diff = bm - tw
        rows.append(np.einsum("kij,ji->k", basis, diff).real)
    return np.array(rows)


def covariant_channel_oracle(eta, rho, rep: GroupRep, gap_tol: float = 1e-8, full: bool = False):
    """``max tr[eta E(rho)]`` over covariant channels, solved directly on the Choi matrix.

    ``J`` lives on ``A (x) B`` with ``tr_B J = I_A`` and ``J`` fixed by the
    twirl with ``conj(U_g) (x) V_g``; the objective is ``tr[J (rho^T (x) eta)]``.
    """
    eta, rho = _density(eta, "eta"), _density(rho, "rho")
    _check_dims(eta, rho, rep)
    da, db = rep.d_in, rep.d_out
    n = da * db
    basis = hermitian_basis(n)
    rows = [_invariance_rows(rep, basis)]
    rhs = [np.zeros(len(basis))]
    for bk in hermitian_basis(da):
        op = kron(bk, np.eye(db))
        rows.append(np.einsum("kij,ji->k", basis, op).real[None])
        rhs.append(np.array([np.trace(bk).real]))
    red, b = sdp.reduce_constraints(np.vstack(rows), np.concatenate(rhs))
    a = np.array([sdp.hermitian_block(np.tensordot(r, basis, axes=1)) for r in red])
    c = -sdp.hermitian_block(kron(rho.T, eta))
    sol = sdp.solve(sdp.SdpProblem([c], [a], b), gap_tol=gap_tol, feas_tol=gap_tol)
    if sol.status != "optimal":
        raise SolverError(f"covariant-channel program ended with status {sol.status}")
    res = OracleValue(-sol.primal_value, real_to_complex(sol.X[0]), sol.gap, sol.kkt_residual)
    return res if full else res.value


def exact_pure_conversion(rho, psi, rep: GroupRep) -> bool:
    """Can a covariant channel map ``rho`` exactly onto the pure state ``psi``?"""
    psi = _pure(psi)
    return fidelity_of_distillation(psi, rho, rep) >= 1 - SLACK


def approx_pure_conversion(rho, psi, rep: GroupRep, epsilon: float) -> bool:
    """Can a covariant channel reach fidelity ``1 - epsilon`` with the pure ``psi``?"""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon = {epsilon} must lie in [0, 1]")
    psi = _pure(psi)
    return fidelity_of_distillation(psi, rho, rep) >= 1 - epsilon - SLACK


# -- several conversions at once -------------------------------------------------


@dataclass
class ConversionQuery:
    inputs: list
    targets: list
    rep: GroupRep
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.inputs or len(self.inputs) != len(self.targets):
            raise ValueError("need equally many inputs and targets, at least one")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon = {self.epsilon} must lie in [0, 1]")
        self.inputs = [_density(r, "input") for r in self.inputs]
        self.targets = [_pure(t) for t in self.targets]
        for r, t in zip(self.inputs, self.targets):
            _check_dims(t, r, self.rep)

    def to_json(self) -> str:
        return json.dumps(
            {
                "inputs": [matrix_to_json(r) for r in self.inputs],
                "targets": [matrix_to_json(t) for t in self.targets],
                "rep": rep_to_json(self.rep),
                "epsilon": self.epsilon,
            }
        )

    @classmethod
    def from_json(cls, data) -> "ConversionQuery":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(
            [matrix_from_json(r) for r in data["inputs"]],
            [matrix_from_json(t) for t in data["targets"]],
            rep_from_json(data["rep"]),
            float(data.get("epsilon", 0.0)),
        )


@dataclass
class ConversionVerdict:
    feasible: bool
    optimal_value: float
    hmin_equiv: float
    witness_p: np.ndarray
    witness_X: np.ndarray
    solver_gap: float = 0.0
    kkt_residual: float = 0.0

    def to_dict(self) -> dict:
        def r(x):
            return float(f"{x:.12g}")

        return {
            "feasible": self.feasible,
            "optimal_value": r(self.optimal_value),
            "hmin_equiv": r(self.hmin_equiv) if math.isfinite(self.hmin_equiv) else str(self.hmin_equiv),
            "witness_p": [r(p) for p in self.witness_p],
            "witness_X": [[[r(z.real), r(z.imag)] for z in row] for row in self.witness_X],
            "solver_gap": r(self.solver_gap),
            "kkt_residual": r(self.kkt_residual),
        }


def multi_state_conversion(q: ConversionQuery, gap_tol: float = 1e-8) -> ConversionVerdict:
    """``min_p Phi(sum_mu p_mu Pi^G(psi_mu^T (x) rho_mu))`` as one program in ``(X, p)``.

    The last weight is eliminated through ``p_L = 1 - sum p``; the verdict is
    feasible iff the optimum reaches ``1 - epsilon``.
    """
    sig = [twirled_operator(t, r, q.rep) for r, t in zip(q.inputs, q.targets)]
    db, da = q.rep.d_out, q.rep.d_in
    basis = hermitian_basis(da)
    nx, npv = len(basis), len(sig) - 1
    m = nx + npv
    eye_b = np.eye(db)
    # block X >= 0
    a1 = [-sdp.hermitian_block(bk) for bk in basis] + [np.zeros((2 * da, 2 * da))] * npv
    # block I (x) X - sum p sigma >= 0
    last = sig[-1]
    a2 = [-sdp.hermitian_block(kron(eye_b, bk)) for bk in basis]
    a2 += [sdp.hermitian_block(s - last) for s in sig[:-1]]
    blocks_c = [np.zeros((2 * da, 2 * da)), -sdp.hermitian_block(last)]
    blocks_a = [np.array(a1), np.array(a2)]
    for mu in range(npv):
        col = np.zeros((m, 1, 1))
        col[nx + mu] = -1.0
        blocks_c.append(np.zeros((1, 1)))
        blocks_a.append(col)
    if npv:
        col = np.zeros((m, 1, 1))
        col[nx:] = 1.0
        blocks_c.append(np.ones((1, 1)))
        blocks_a.append(col)
    b = np.concatenate([[-np.trace(bk).real for bk in basis], np.zeros(npv)])
    sol = sdp.solve(sdp.SdpProblem(blocks_c, blocks_a, b), gap_tol=gap_tol, feas_tol=gap_tol)
    if sol.status != "optimal":
        raise SolverError(f"joint conversion program ended with status {sol.status}")
    x = np.tensordot(sol.y[:nx], basis, axes=1)
    p = np.append(sol.y[nx:], 1 - sol.y[nx:].sum())
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    val = -sol.dual_value
    return ConversionVerdict(
        feasible=bool(val >= 1 - q.epsilon - SLACK),
        optimal_value=val,
        hmin_equiv=-math.log2(val) if val > 0 else math.inf,
        witness_p=p,
        witness_X=x,
        solver_gap=sol.gap,
        kkt_residual=sol.kkt_residual,
    )


def twirled_mixture(q: ConversionQuery, p) -> np.ndarray:
    """``sum_mu p_mu Pi^G(psi_mu^T (x) rho_mu)`` for an explicit weight vector."""
    p = np.asarray(p, dtype=float)
    if p.shape != (len(q.inputs),) or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
        raise ValueError("p must be a probability vector over the query")
    return sum(w * twirled_operator(t, r, q.rep) for w, r, t in zip(p, q.inputs, q.targets))


# -- decoder twirl ----------------------------------------------------------------


def twirl_decoder(dec: QuantumChannel, rep: GroupRep) -> QuantumChannel:
    """Group average ``|G|^-1 sum_g V_g^dag o dec o U_g``; covariant for ``rep``."""
    return twirl_channel(dec, rep)


def orbit_closed(states, unitaries, tol: float = 1e-9) -> list[np.ndarray]:
    """Close a list of pure state vectors under a finite group (up to global phase)."""
    out = []
    for v in states:
        for u in unitaries:
            w = u @ np.asarray(v, dtype=complex)
            if not any(abs(abs(np.vdot(w, x)) - 1) < tol for x in out):
                out.append(w)
    return out


def worst_sampled_fidelity(channel: QuantumChannel, states) -> float:
    """``min_psi <psi| channel(psi) |psi>`` over the given logical pure states."""
    vals = []
    for v in states:
        v = np.asarray(v, dtype=complex)
        out = channel(proj(v))
        vals.append(float(np.real(v.conj() @ out @ v)))
    return min(vals)
