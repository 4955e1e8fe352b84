"""Conditional min-entropy ``H_min(A|B)`` and its exponential ``Phi = 2**-H_min``.

``Phi(K) = min { tr X : X >= 0, I_A (x) X_B >= K_AB }`` is evaluated with the
interior-point solver in :mod:`covcert.sdp`. Logs are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import sdp
from .linalg import (
    ShapeError,
    as_matrix,
    dag,
    hermitian_basis,
    is_psd,
    kron,
    partial_trace,
    support_isometry,
)


class SolverError(RuntimeError):
    pass


@dataclass
class MinEntropyResult:
    hmin: float
    phi: float
    witness_X: np.ndarray
    solver_gap: float
    kkt_residual: float = 0.0
    iterations: int = 0
    reduced_dim: int = 0


def assemble_min_entropy_program(sigma, dA: int, dB: int) -> sdp.SdpProblem:
    """Standard-form program whose dual optimum is ``-Phi_{A|B}(sigma)``.

    The dual variable ``y`` holds the coordinates of ``X`` in an orthonormal
    Hermitian basis; the dual slack has the two blocks ``X`` and
    ``I (x) X - sigma``. Complex blocks are embedded with
    :func:`sdp.hermitian_block`, so no factor of two survives in the values.
    """
    sigma = as_matrix(sigma)
    if sigma.shape != (dA * dB, dA * dB):
        raise ShapeError(f"sigma is {sigma.shape}, expected {(dA * dB,) * 2}")
    if not is_psd(sigma):
        raise ValueError("sigma must be positive semidefinite")
    basis = hermitian_basis(dB)
    eye_a = np.eye(dA)
    a1 = np.array([-sdp.hermitian_block(bi) for bi in basis])
    a2 = np.array([-sdp.hermitian_block(kron(eye_a, bi)) for bi in basis])
    c1 = np.zeros((2 * dB, 2 * dB))
    c2 = -sdp.hermitian_block(sigma)
    b = np.array([-np.trace(bi).real for bi in basis])
    return sdp.SdpProblem([c1, c2], [a1, a2], b)


def hmin(sigma, dA: int, dB: int, gap_tol: float = 1e-8, max_iter: int = 100) -> MinEntropyResult:
    """``H_min(A|B)`` of a PSD operator on ``A (x) B`` (trace need not be one).

    ``B`` is first compressed onto the support of ``tr_A sigma``; this leaves
    ``Phi`` unchanged and keeps the program small.
    """
    sigma = as_matrix(sigma)
    if sigma.shape != (dA * dB, dA * dB):
        raise ShapeError(f"sigma is {sigma.shape}, expected {(dA * dB,) * 2}")
    if not is_psd(sigma):
        raise ValueError("sigma must be positive semidefinite")
    sigma = (sigma + dag(sigma)) / 2
    scale = float(np.trace(sigma).real)
    if scale <= 1e-300:
        return MinEntropyResult(math.inf, 0.0, np.zeros((dB, dB), dtype=complex), 0.0)
    marg = partial_trace(sigma, (dA, dB), [0])
    w = support_isometry(marg)
    lift = kron(np.eye(dA), w)
    reduced = dag(lift) @ sigma @ lift / scale
    r = w.shape[1]
    problem = assemble_min_entropy_program(reduced, dA, r)
    sol = sdp.solve(problem, gap_tol=gap_tol, feas_tol=gap_tol, max_iter=max_iter)
    if sol.status != "optimal":
        raise SolverError(f"min-entropy SDP ended with status {sol.status} (gap {sol.gap:.2e})")
    x_red = np.tensordot(sol.y, hermitian_basis(r), axes=1)
    witness = scale * (w @ x_red @ dag(w))
    phi = float(np.trace(witness).real)
    return MinEntropyResult(
        hmin=-math.log2(phi),
        phi=phi,
        witness_X=witness,
        solver_gap=sol.gap,
        kkt_residual=sol.kkt_residual,
        iterations=sol.iterations,
        reduced_dim=r,
    )


def phi(sigma, dA: int, dB: int, **kw) -> float:
    return hmin(sigma, dA, dB, **kw).phi


def phi_decompose(lambda1: float, L, lambda2: float, M, dA: int, **kw) -> float:
    """``Phi(lambda1 I (x) L + lambda2 M) = lambda1 tr L + lambda2 Phi(M)``.

    Only one program, on ``M``, is solved. ``M = 0`` contributes nothing.
    """
    if lambda1 < 0 or lambda2 < 0:
        raise ValueError("coefficients must be non-negative")
    L, M = as_matrix(L), as_matrix(M)
    dB = L.shape[0]
    if not (is_psd(L) and is_psd(M)):
        raise ValueError("L and M must be positive semidefinite")
    head = lambda1 * float(np.trace(L).real)
    if lambda2 == 0 or not np.any(M):
        return head
    return head + lambda2 * phi(M, dA, dB, **kw)
