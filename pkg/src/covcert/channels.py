"""Quantum channels in Kraus form, Choi states, noise models and group twirls."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .linalg import (
    ShapeError,
    as_matrix,
    check_shape,
    dag,
    eig_hermitian,
    kron,
    max_entangled,
    proj,
)

TOL_TP = 1e-9


@dataclass(frozen=True)
class QuantumChannel:
    """A completely positive map given by Kraus operators.

    ``kraus`` has shape ``(k, d_out, d_in)``. ``trace_preserving=False`` marks a
    trace-non-increasing instrument branch (sum K^dag K <= I).
    """

    kraus: np.ndarray
    in_shape: tuple[int, ...]
    out_shape: tuple[int, ...]
    trace_preserving: bool = True
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        in_shape = check_shape(self.in_shape)
        out_shape = check_shape(self.out_shape)
        if k.ndim != 3 or k.shape[1:] != (int(np.prod(out_shape)), int(np.prod(in_shape))):
            raise ShapeError(
                f"Kraus operators of shape {k.shape[1:]} do not map {in_shape} -> {out_shape}"
            )
        object.__setattr__(self, "kraus", k)
        object.__setattr__(self, "in_shape", in_shape)
        object.__setattr__(self, "out_shape", out_shape)
        if not self.validate:
            return
        flat = k.reshape(-1, k.shape[2])
        gram = dag(flat) @ flat
        eye = np.eye(self.d_in)
        if self.trace_preserving:
            if np.linalg.norm(gram - eye) > TOL_TP * max(1.0, self.d_in):
                raise ValueError("Kraus operators are not trace preserving")
        elif np.linalg.eigvalsh(eye - (gram + dag(gram)) / 2)[0] < -TOL_TP:
            raise ValueError("Kraus operators are trace increasing")

    @property
    def d_in(self) -> int:
        return int(np.prod(self.in_shape))

    @property
    def d_out(self) -> int:
        return int(np.prod(self.out_shape))

    def __call__(self, rho):
        return apply(self, rho)


@dataclass(frozen=True)
class ChoiState:
    """Normalized Choi state on input (x) output."""

    matrix: np.ndarray
    in_dim: int
    out_dim: int

    @property
    def dims(self) -> tuple[int, int]:
        return self.in_dim, self.out_dim


@dataclass(frozen=True)
class GroupRep:
    """A finite group given by matching lists of unitaries on two spaces."""

    unitaries_in: np.ndarray
    unitaries_out: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        uin = np.asarray(self.unitaries_in, dtype=complex)
        uout = np.asarray(self.unitaries_out, dtype=complex)
        if uin.ndim != 3 or uout.ndim != 3 or len(uin) != len(uout) or len(uin) == 0:
            raise ShapeError("a GroupRep needs equally many (nonzero) square unitaries per side")
        for us in (uin, uout):
            d = us.shape[1]
            if us.shape[2] != d:
                raise ShapeError("representation matrices must be square")
            dev = np.abs(np.einsum("gai,gaj->gij", us.conj(), us) - np.eye(d)).max()
            if dev > 1e-9:
                raise ValueError(f"representation matrix is not unitary (deviation {dev:.2e})")
        labels = tuple(self.labels) if len(self.labels) else tuple(range(len(uin)))
        if len(labels) != len(uin):
            raise ValueError("one label per group element is required")
        object.__setattr__(self, "unitaries_in", uin)
        object.__setattr__(self, "unitaries_out", uout)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def same(cls, unitaries, labels=()) -> "GroupRep":
        us = np.asarray(unitaries, dtype=complex)
        return cls(us, us, labels)

    @property
    def order(self) -> int:
        return len(self.unitaries_in)

    @property
    def d_in(self) -> int:
        return self.unitaries_in.shape[1]

    @property
    def d_out(self) -> int:
        return self.unitaries_out.shape[1]

    def check_closure(self, tol: float = 1e-8) -> bool:
        """Products of elements stay in the set, up to a global phase, on both sides."""
        return _closed_up_to_phase(self.unitaries_in, tol) and _closed_up_to_phase(
            self.unitaries_out, tol
        )


def _phase_normal(u: np.ndarray) -> np.ndarray:
    flat = u.ravel()
    mag = np.abs(flat)
    # first entry within rounding of the largest magnitude, so ties pick a stable pivot
    k = int(np.flatnonzero(mag >= mag.max() - 1e-9)[0])
    return u * (abs(flat[k]) / flat[k])


def _closed_up_to_phase(us: np.ndarray, tol: float) -> bool:
    normed = [_phase_normal(u) for u in us]
    for a, b in itertools.product(us, us):
        p = _phase_normal(a @ b)
        if not any(np.abs(p - q).max() <= tol for q in normed):
            return False
    return True


# -- basic constructors -------------------------------------------------------


def identity_channel(shape) -> QuantumChannel:
    shape = check_shape(shape if not isinstance(shape, int) else (shape,))
    return QuantumChannel(np.eye(int(np.prod(shape)))[None], shape, shape)


def unitary_channel(u, shape=None) -> QuantumChannel:
    u = as_matrix(u)
    shape = (u.shape[0],) if shape is None else shape
    return QuantumChannel(u[None], shape, shape)


def isometry_channel(v, in_shape=None, out_shape=None) -> QuantumChannel:
    v = as_matrix(v)
    return QuantumChannel(
        v[None],
        (v.shape[1],) if in_shape is None else in_shape,
        (v.shape[0],) if out_shape is None else out_shape,
    )


def apply(ch: QuantumChannel, rho) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape != (ch.d_in, ch.d_in):
        raise ShapeError(f"input of dimension {rho.shape[0]} for a channel on {ch.d_in}")
    k = ch.kraus
    return np.einsum("kai,ij,kbj->ab", k, rho, k.conj(), optimize=True)


def compose(second: QuantumChannel, first: QuantumChannel) -> QuantumChannel:
    """The channel ``second o first``; Kraus operators that vanish are dropped."""
    if second.d_in != first.d_out:
        raise ShapeError(
            f"cannot compose: first outputs {first.out_shape}, second takes {second.in_shape}"
        )
    k = np.einsum("aij,bjk->abik", second.kraus, first.kraus).reshape(
        -1, second.d_out, first.d_in
    )
    norms = np.linalg.norm(k.reshape(len(k), -1), axis=1)
    keep = norms > 1e-14 * max(1.0, norms.max())
    if not keep.any():
        keep[0] = True
    return QuantumChannel(
        k[keep],
        first.in_shape,
        second.out_shape,
        second.trace_preserving and first.trace_preserving,
    )


def choi_factor(ch: QuantumChannel) -> np.ndarray:
    """Columns ``F`` with ``J(ch) = F F^dag`` (one column per Kraus operator)."""
    k = ch.kraus
    vecs = np.transpose(k, (0, 2, 1)).reshape(len(k), -1)
    return vecs.T / np.sqrt(ch.d_in)


def choi_state(ch: QuantumChannel) -> ChoiState:
    """``d_in^-1 (id (x) ch)(sum_ij |ii><jj|)`` with the input copy as first factor."""
    if not ch.trace_preserving:
        raise ValueError("the Choi state is defined here for trace-preserving channels only")
    f = choi_factor(ch)
    return ChoiState(f @ dag(f), ch.d_in, ch.d_out)


def channel_from_choi(choi: ChoiState, out_shape=None, in_shape=None, rtol=1e-12) -> QuantumChannel:
    w, v = eig_hermitian(choi.matrix * choi.in_dim)
    keep = w > rtol * max(w.max(), 1e-300)
    kraus = [
        np.sqrt(lam) * vec.reshape(choi.in_dim, choi.out_dim).T
        for lam, vec in zip(w[keep], v[:, keep].T)
    ]
    return QuantumChannel(
        np.array(kraus),
        (choi.in_dim,) if in_shape is None else in_shape,
        (choi.out_dim,) if out_shape is None else out_shape,
    )


# -- noise models --------------------------------------------------------------


def _factor_op(shape, ops: dict[int, np.ndarray]) -> np.ndarray:
    return kron(*(ops.get(i, np.eye(d)) for i, d in enumerate(shape)))


def erasure_channel(shape, erased) -> QuantumChannel:
    """Partial trace over the ``erased`` factors (0-based), as a Kraus channel."""
    shape = check_shape(shape)
    erased = sorted(set(int(e) for e in erased))
    if not erased or any(e < 0 or e >= len(shape) for e in erased):
        raise ShapeError(f"invalid erased set {erased} for {len(shape)} factors")
    if len(erased) == len(shape):
        raise ValueError("cannot erase every factor")
    kraus = []
    for idx in itertools.product(*(range(shape[e]) for e in erased)):
        ops = {e: np.eye(shape[e])[[j]] for e, j in zip(erased, idx)}
        kraus.append(_factor_op(shape, ops))
    kept = tuple(d for i, d in enumerate(shape) if i not in erased)
    # complete by construction; the generic check costs O(d^3) on large spaces
    return QuantumChannel(np.array(kraus), shape, kept, validate=False)


def erase_after(ch: QuantumChannel, erased) -> QuantumChannel:
    """``tr_erased o ch`` built by slicing the Kraus operators of ``ch``.

    Same map as ``compose(erasure_channel(ch.out_shape, erased), ch)`` without
    forming the erasure channel on the full output space.
    """
    shape = ch.out_shape
    erased = sorted(set(int(e) for e in erased))
    if not erased or any(e < 0 or e >= len(shape) for e in erased):
        raise ShapeError(f"invalid erased set {erased} for {len(shape)} factors")
    if len(erased) == len(shape):
        raise ValueError("cannot erase every factor")
    kept = [i for i in range(len(shape)) if i not in erased]
    t = ch.kraus.reshape((len(ch.kraus),) + shape + (ch.d_in,))
    t = np.moveaxis(t, [e + 1 for e in erased], list(range(1, len(erased) + 1)))
    kept_shape = tuple(shape[i] for i in kept)
    k = t.reshape((-1, int(np.prod(kept_shape)), ch.d_in))
    k = k[np.linalg.norm(k, axis=(1, 2)) > 1e-14]
    return QuantumChannel(k, ch.in_shape, kept_shape, ch.trace_preserving)


def depolarizing_channel(d: int, p: float, shape=None) -> QuantumChannel:
    """``rho -> (1-p) rho + p tr(rho) I/d``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability {p} outside [0, 1]")
    shape = (d,) if shape is None else check_shape(shape, d)
    kraus = [np.sqrt(1 - p) * np.eye(d)]
    if p > 0:
        e = np.eye(d)
        s = np.sqrt(p / d)
        kraus += [s * np.outer(e[i], e[j]) for i in range(d) for j in range(d)]
    return QuantumChannel(np.array(kraus), shape, shape)


def known_erasure_channel(shape, s: Sequence[int]) -> QuantumChannel:
    """Erase the factors flagged in the bit string ``s``, reset them to ``|0>``,
    and record ``s`` in a classical register of dimension ``2**n`` placed first.
    """
    shape = check_shape(shape)
    s = tuple(int(b) for b in s)
    if len(s) != len(shape) or any(b not in (0, 1) for b in s):
        raise ValueError("s must be a bit string with one bit per factor")
    if all(s):
        raise ValueError("at least one factor must survive the erasure")
    n = len(shape)
    reg = np.zeros((2**n, 1))
    reg[int("".join(map(str, s)), 2), 0] = 1.0
    erased = [i for i, b in enumerate(s) if b]
    kraus = []
    for idx in itertools.product(*(range(shape[e]) for e in erased)):
        ops = {}
        for e, j in zip(erased, idx):
            op = np.zeros((shape[e], shape[e]))
            op[0, j] = 1.0
            ops[e] = op
        kraus.append(kron(reg, _factor_op(shape, ops)))
    return QuantumChannel(np.array(kraus), shape, (2**n,) + shape, validate=False)


# -- covariance and twirls -----------------------------------------------------


def _action_gap(ka: np.ndarray, kb: np.ndarray) -> float:
    """max over basis ops |i><j| of ||A(|i><j|) - B(|i><j|)||_F for Kraus sets ka, kb.

    ``A(|i><j|) - B(|i><j|) = P_i Q_j^dag`` with ``P_i = [a_i, b_i]`` and
    ``Q_j = [a_j, -b_j]`` (columns over Kraus index). Reducing both by QR keeps
    the norm exact without forming output-space matrices.
    """
    pa = np.transpose(ka, (2, 1, 0))  # (d_in, d_out, k)
    pb = np.transpose(kb, (2, 1, 0))
    rp = np.linalg.qr(np.concatenate([pa, pb], axis=2), mode="r")
    rq = np.linalg.qr(np.concatenate([pa, -pb], axis=2), mode="r")
    prod = np.einsum("iab,jcb->ijac", rp, rq.conj())
    return float(np.sqrt(np.max(np.sum(np.abs(prod) ** 2, axis=(2, 3)))))


def covariance_deviation(ch: QuantumChannel, u_in, apply_out: Callable[[np.ndarray], np.ndarray]):
    """Deviation of ``ch o U_in`` from ``U_out o ch``; ``apply_out`` maps Kraus stacks."""
    ka = ch.kraus @ u_in
    kb = apply_out(ch.kraus)
    return _action_gap(ka, kb)


def is_covariant(ch: QuantumChannel, rep: GroupRep, tol: float = 1e-9) -> tuple[bool, float]:
    """Check ``ch(U_g . U_g^dag) = V_g ch(.) V_g^dag`` for every element; returns (ok, max deviation)."""
    if rep.d_in != ch.d_in or rep.d_out != ch.d_out:
        raise ShapeError("representation dimensions do not match the channel")
    worst = 0.0
    for u, v in zip(rep.unitaries_in, rep.unitaries_out):
        worst = max(worst, covariance_deviation(ch, u, lambda k, v=v: v @ k))
    return worst <= tol, worst


def g_twirl(op, us_r, us_a) -> np.ndarray:
    """Group average of ``(conj(U_R) (x) U_A) op (...)^dag`` over a finite group."""
    op = as_matrix(op)
    us_r, us_a = np.asarray(us_r, dtype=complex), np.asarray(us_a, dtype=complex)
    if len(us_r) == 0 or len(us_r) != len(us_a):
        raise ValueError("twirl needs a nonempty list of group elements on each side")
    dim = us_r.shape[1] * us_a.shape[1]
    if op.shape != (dim, dim):
        raise ShapeError("operator does not live on R (x) A")
    out = np.zeros_like(op)
    for ur, ua in zip(us_r, us_a):
        w = np.kron(ur.conj(), ua)
        out += w @ op @ dag(w)
    return out / len(us_r)


def haar_pair_twirl_state(d: int) -> np.ndarray:
    """Haar average of ``(conj(U) (x) U)(psi^T (x) psi)(...)^dag`` for any pure psi.

    Equals ``lam I/d^2 + (1-lam) phi+`` with ``lam = (d^2 - d)/(d^2 - 1)``.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    lam = (d * d - d) / (d * d - 1)
    return lam * np.eye(d * d) / d**2 + (1 - lam) * proj(max_entangled(d))


def twirl_channel(ch: QuantumChannel, rep: GroupRep) -> QuantumChannel:
    """``|G|^-1 sum_g V_g^dag o ch o U_g``; covariant w.r.t. ``rep`` by construction."""
    if rep.d_in != ch.d_in or rep.d_out != ch.d_out:
        raise ShapeError("representation dimensions do not match the channel")
    g = rep.order
    kraus = [dag(v) @ k @ u / np.sqrt(g) for u, v in zip(rep.unitaries_in, rep.unitaries_out) for k in ch.kraus]
    return QuantumChannel(np.array(kraus), ch.in_shape, ch.out_shape, ch.trace_preserving)


# -- JSON ------------------------------------------------------------------------


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.ndim == 3 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    if a.ndim == 2:
        return a.astype(complex)
    raise ValueError("matrices are lists of rows of [re, im] pairs")


def channel_to_json(ch: QuantumChannel) -> dict:
    return {
        "in_shape": list(ch.in_shape),
        "out_shape": list(ch.out_shape),
        "kraus": [matrix_to_json(k) for k in ch.kraus],
    }


def channel_from_json(data: dict | str) -> QuantumChannel:
    if isinstance(data, str):
        data = json.loads(data)
    kraus = np.array([matrix_from_json(k) for k in data["kraus"]])
    return QuantumChannel(kraus, tuple(data["in_shape"]), tuple(data["out_shape"]))


def rep_to_json(rep: GroupRep) -> dict:
    return {
        "labels": [str(x) for x in rep.labels],
        "unitaries_in": [matrix_to_json(u) for u in rep.unitaries_in],
        "unitaries_out": [matrix_to_json(u) for u in rep.unitaries_out],
    }


def rep_from_json(data: dict | str) -> GroupRep:
    if isinstance(data, str):
        data = json.loads(data)
    uin = np.array([matrix_from_json(u) for u in data["unitaries_in"]])
    uout = np.array([matrix_from_json(u) for u in data.get("unitaries_out", data["unitaries_in"])])
    return GroupRep(uin, uout, tuple(data.get("labels", ())))
