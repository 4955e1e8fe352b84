"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Subsystem
structure is carried separately as a tuple of factor dimensions (a "shape").
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

TOL_HERM = 1e-9
TOL_PSD = 1e-9


class ShapeError(ValueError):
    """Raised when a matrix does not match the subsystem structure it is given."""


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def check_shape(shape: Sequence[int], dim: int | None = None) -> tuple[int, ...]:
    factors = tuple(int(f) for f in shape)
    if not factors or any(f < 1 for f in factors):
        raise ShapeError(f"invalid subsystem shape {shape!r}")
    if dim is not None and int(np.prod(factors)) != dim:
        raise ShapeError(f"shape {factors} does not multiply to {dim}")
    return factors


def kron(*ms) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors)."""
    if not ms:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (np.asarray(m, dtype=complex) for m in ms))


def ket(index: int | Sequence[int], dims: int | Sequence[int]) -> np.ndarray:
    """Computational-basis column vector ``|i>`` or ``|i1 i2 ...>``."""
    if isinstance(dims, (int, np.integer)):
        dims, index = (int(dims),), (int(index),)
    flat = int(np.ravel_multi_index(tuple(index), tuple(dims)))
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    v[flat] = 1.0
    return v


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    return np.outer(v, v.conj())


def max_entangled(d: int, normalized: bool = True) -> np.ndarray:
    """The vector sum_i |ii>, optionally divided by sqrt(d)."""
    v = np.eye(d, dtype=complex).ravel()
    return v / np.sqrt(d) if normalized else v


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def partial_trace(m, shape: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """Trace out the factors listed in ``traced`` (0-based) of a square matrix.

    The remaining factors keep their original order. Tracing every factor
    returns the 1x1 matrix ``[[tr m]]``.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError("partial_trace needs a square matrix")
    dims = check_shape(shape, m.shape[0])
    traced = sorted(set(int(t) for t in traced))
    if any(t < 0 or t >= len(dims) for t in traced):
        raise ShapeError(f"traced indices {traced} out of range for {len(dims)} factors")
    kept = [i for i in range(len(dims)) if i not in traced]
    n = len(dims)
    t = m.reshape(dims + dims)
    row = list(range(n))
    col = [n + i if i in kept else i for i in range(n)]
    out = [i for i in kept] + [n + i for i in kept]
    res = np.einsum(t, row + col, out)
    dk = int(np.prod([dims[i] for i in kept])) if kept else 1
    return res.reshape(dk, dk)


def permute_factors(m, shape: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square matrix: new factor k is old factor order[k]."""
    m = as_matrix(m)
    dims = check_shape(shape, m.shape[0])
    n = len(dims)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ShapeError(f"{order} is not a permutation of {n} factors")
    t = m.reshape(dims + dims).transpose(order + [n + i for i in order])
    return t.reshape(m.shape)


def is_hermitian(m, tol: float = TOL_HERM) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    scale = max(1.0, np.linalg.norm(m))
    return bool(np.linalg.norm(m - dag(m)) <= tol * scale)


def hermitize(m, tol: float = TOL_HERM) -> np.ndarray:
    """Return (m + m^dag)/2, refusing inputs that are not Hermitian within ``tol``."""
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    return (m + dag(m)) / 2


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Ascending real eigenvalues and unitary eigenvectors of a Hermitian matrix."""
    h = hermitize(m)
    w, v = np.linalg.eigh(h)
    return w, v


def is_psd(m, tol: float = TOL_PSD) -> bool:
    m = np.asarray(m)
    if not is_hermitian(m):
        return False
    w = np.linalg.eigvalsh((m + dag(m)) / 2)
    return bool(w[0] >= -tol * max(1.0, np.linalg.norm(m)))


def clip_psd(m) -> np.ndarray:
    """Project a nearly-PSD Hermitian matrix onto the PSD cone."""
    w, v = eig_hermitian(m)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -TOL_PSD * scale:
        raise ValueError(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    return (v * w) @ dag(v)


def is_state(rho, tol: float = 1e-9) -> bool:
    rho = np.asarray(rho)
    return is_psd(rho, tol) and abs(np.trace(rho) - 1) <= tol * 10


def sqrtm_psd(m) -> np.ndarray:
    w, v = eig_hermitian(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ dag(v)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2`` of two states."""
    rho, sigma = as_matrix(rho), as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise ShapeError("fidelity of states with different dimensions")
    for s in (rho, sigma):
        if not is_state(s, 1e-8):
            raise ValueError("fidelity needs PSD trace-one inputs")
    r = sqrtm_psd(rho)
    w = np.linalg.eigvalsh(hermitize(r @ sigma @ r, 1e-6))
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)
    return min(max(f, 0.0), 1.0)


def embed_complex_as_real(h) -> np.ndarray:
    """Real symmetric ``[[Re h, -Im h], [Im h, Re h]]`` of a Hermitian matrix.

    The embedding is PSD iff ``h`` is, each eigenvalue appears twice, and the
    trace doubles.
    """
    h = hermitize(h)
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def real_to_complex(z: np.ndarray) -> np.ndarray:
    """Hermitian matrix represented by a real symmetric 2n x 2n matrix.

    Inverse of :func:`embed_complex_as_real` on its range; for a general real
    PSD ``z`` it returns the PSD matrix ``c`` with ``<embed(h), z> = 2 Re tr(h c)``.
    """
    n = z.shape[0] // 2
    z11, z12, z21, z22 = z[:n, :n], z[:n, n:], z[n:, :n], z[n:, n:]
    c = ((z11 + z22) + 1j * (z21 - z12)) / 2
    return (c + dag(c)) / 2


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis of d x d Hermitian matrices, shape (d*d, d, d)."""
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    s = 1 / np.sqrt(2)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = s
            basis.append(e)
            f = np.zeros((d, d), dtype=complex)
            f[i, j], f[j, i] = -1j * s, 1j * s
            basis.append(f)
    return np.array(basis)


def support_isometry(m, rtol: float = 1e-12) -> np.ndarray:
    """Columns spanning the range of a PSD matrix (an isometry ``W`` with ``W^dag W = I``)."""
    w, v = eig_hermitian(m)
    cut = rtol * max(float(np.max(np.abs(w))), 1e-300)
    return v[:, w > cut]


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def random_psd(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    return g @ dag(g)
