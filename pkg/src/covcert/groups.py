"""Concrete finite groups used by the asymmetry engine and the tests."""

from __future__ import annotations

import numpy as np

from .channels import GroupRep, _phase_normal
from .linalg import kron


def cyclic_phase_rep(order: int, dim: int | None = None) -> GroupRep:
    """Z_order acting on C^dim by ``diag(w^0, w^1, ...)^k`` with ``w = exp(2 pi i / order)``."""
    dim = order if dim is None else dim
    w = np.exp(2j * np.pi / order)
    gen = np.diag(w ** np.arange(dim))
    us = [np.linalg.matrix_power(gen, k) for k in range(order)]
    return GroupRep.same(us, tuple(f"g^{k}" for k in range(order)))


def z2_rep() -> GroupRep:
    """{I, Z} on a qubit."""
    return GroupRep.same([np.eye(2), np.diag([1.0, -1.0])], ("I", "Z"))


def s3_rep() -> GroupRep:
    """The two-dimensional irreducible (real orthogonal) representation of S_3."""
    c, s = np.cos(2 * np.pi / 3), np.sin(2 * np.pi / 3)
    r = np.array([[c, -s], [s, c]])
    f = np.array([[1.0, 0.0], [0.0, -1.0]])
    us = [np.eye(2), r, r @ r, f, f @ r, f @ r @ r]
    return GroupRep.same(us, ("e", "r", "r2", "f", "fr", "fr2"))


def clifford_group_1q() -> np.ndarray:
    """The 24 single-qubit Clifford unitaries (one representative per global phase)."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.diag([1, 1j])
    found = [_phase_normal(np.eye(2, dtype=complex))]
    frontier = list(found)
    while frontier:
        nxt = []
        for u in frontier:
            for g in (h, s):
                p = _phase_normal(g @ u)
                if not any(np.abs(p - q).max() < 1e-9 for q in found):
                    found.append(p)
                    nxt.append(p)
        frontier = nxt
    return np.array(found)


def tensor_power_rep(rep: GroupRep, n: int) -> GroupRep:
    """``U_g^{(x) n}`` on both sides."""
    uin = [kron(*([u] * n)) for u in rep.unitaries_in]
    uout = [kron(*([u] * n)) for u in rep.unitaries_out]
    return GroupRep(uin, uout, rep.labels)
