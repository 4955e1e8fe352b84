"""The W-state code: a U(d)-covariant code on n physical qudits of dimension d+1.

Codewords are ``|i^(n)> = n^-1/2 (|i,d,...,d> + |d,i,...,d> + ... + |d,...,d,i>)``
and every logical unitary ``U`` is implemented transversally by ``(U + 1)^{(x) n}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channels import ChoiState, QuantumChannel, apply, known_erasure_channel
from .linalg import dag, kron, proj

# Largest physical Hilbert-space dimension built as dense channels / Choi states.
DENSE_CAP = 4096
# Largest input dimension (register (x) physical) for the dense decoder channel.
DECODER_CAP = 2048
# Largest encoded state vector for the structured known-erasure simulation.
VECTOR_CAP = 2**22


@dataclass(frozen=True)
class WCodeParams:
    n: int
    d_L: int
    N_e: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not (self.d_L == math.inf or (int(self.d_L) == self.d_L and self.d_L >= 2)):
            raise ValueError("d_L must be an integer >= 2 (or inf for closed forms)")
        if not 0 <= self.N_e < self.n:
            raise ValueError("need 0 <= N_e < n")

    @property
    def d_phys(self) -> int:
        return int(self.d_L) + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.d_phys,) * self.n

    @property
    def dim(self) -> int:
        return self.d_phys**self.n


def _finite(params: WCodeParams) -> int:
    if params.d_L == math.inf:
        raise ValueError("this construction needs a finite d_L")
    return int(params.d_L)


def _codeword_vector(i: int, n: int, d: int) -> np.ndarray:
    dp = d + 1
    v = np.zeros(dp**n, dtype=complex)
    for k in range(n):
        digits = [d] * n
        digits[k] = i
        v[np.ravel_multi_index(digits, (dp,) * n)] += 1.0
    return v / np.sqrt(n)


def codeword(i: int, params: WCodeParams) -> np.ndarray:
    d = _finite(params)
    if not 0 <= i < d:
        raise ValueError(f"logical index {i} outside 0..{d - 1}")
    if params.dim > VECTOR_CAP:
        raise ValueError("code too large to hold a codeword vector")
    return _codeword_vector(i, params.n, d)


def _isometry(n: int, d: int) -> np.ndarray:
    return np.stack([_codeword_vector(i, n, d) for i in range(d)], axis=1)


def encoder(params: WCodeParams) -> QuantumChannel:
    """The isometric encoder ``V = sum_i |i^(n)><i|``."""
    d = _finite(params)
    if params.dim > VECTOR_CAP:
        raise ValueError("code too large for a dense encoder")
    return QuantumChannel(_isometry(params.n, d)[None], (d,), params.shape)


def lift(u) -> np.ndarray:
    """Single-site physical unitary ``U (+) 1`` implementing logical ``U``."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    out = np.eye(d + 1, dtype=complex)
    out[:d, :d] = u
    return out


def choi_encoder(m: int, d: int) -> np.ndarray:
    v = _isometry(m, d).T.reshape(-1) / np.sqrt(d)
    return proj(v)


def choi_after_erasure_recursive(params: WCodeParams) -> ChoiState:
    """Choi state of ``tr_{erased} o E^(n)`` on ``L (x) kept``, built by peeling one site at a time.

    Erasing one site of an ``n``-site code gives
    ``(1/(d n)) I (x) |perp><perp| + (1 - 1/n) J(E^(n-1))``; applying the same
    step to the remaining erased sites yields weights ``N_e/(d n)`` and ``1 - N_e/n``.
    By permutation symmetry the result does not depend on which sites are erased.
    """
    d = _finite(params)
    if params.N_e < 1:
        raise ValueError("need at least one erased site")
    m = params.n - params.N_e
    if (d + 1) ** m * d > DENSE_CAP:
        raise ValueError("kept system too large for a dense Choi state")
    perp = np.zeros((d + 1) ** m)
    perp[-1] = 1.0
    floor = np.kron(np.eye(d), proj(perp))

    def peel(n_sites: int, to_erase: int) -> np.ndarray:
        if to_erase == 0:
            return choi_encoder(n_sites, d)
        return floor / (d * n_sites) + (1 - 1 / n_sites) * peel(n_sites - 1, to_erase - 1)

    return ChoiState(peel(params.n, params.N_e), d, (d + 1) ** m)


def analytic_phi(params: WCodeParams) -> float:
    """``Phi(J(tr_{N_e} o E^(n))) = N_e/(d n) + (1 - N_e/n) d`` (finite d only)."""
    d = _finite(params)
    return params.N_e / (d * params.n) + (1 - params.N_e / params.n) * d


def analytic_epsilon_min(params: WCodeParams) -> float:
    """Smallest correctable worst-case error ``(N_e/n)(1 - 1/d_L)``; ``N_e/n`` when ``d_L`` is inf."""
    frac = params.N_e / params.n
    if params.d_L == math.inf:
        return frac
    return frac * (1 - 1 / params.d_L)


def comparison_bound(n: int, d_L: float = 2) -> float:
    """Comparison upper bound ``(sqrt 2 + d_L)/sqrt n`` on ``1 - F_EF`` for one erasure."""
    return (math.sqrt(2) + d_L) / math.sqrt(n)


# -- known erasure and the decoder ---------------------------------------------


def _bits(s: Sequence[int], n: int) -> tuple[int, ...]:
    s = tuple(int(b) for b in s)
    if len(s) != n or any(b not in (0, 1) for b in s):
        raise ValueError("s must be a bit string of length n")
    return s


def sector_kraus(params: WCodeParams, s: tuple[int, ...]) -> list[np.ndarray]:
    """Operators ``<j|_{P_s} (x) V^(m)dag`` (P -> L), one per erased basis state j."""
    d = _finite(params)
    shape = params.shape
    erased = [i for i, b in enumerate(s) if b]
    kept = [i for i, b in enumerate(s) if not b]
    vdag = dag(_isometry(len(kept), d)).reshape((d,) + tuple(shape[k] for k in kept))
    ops = []
    for j in itertools.product(*(range(shape[e]) for e in erased)):
        full = np.zeros((d,) + shape, dtype=complex)
        idx = [slice(None)] * (len(shape) + 1)
        for e, je in zip(erased, j):
            idx[e + 1] = je
        full[tuple(idx)] = vdag
        ops.append(full.reshape(d, -1))
    return ops


def prefix_order(n: int, erased: Iterable[int]) -> list[int]:
    """Factor order moving the (0-based) ``erased`` sites to the front, keeping relative order."""
    erased = sorted(set(int(e) for e in erased))
    if any(not 0 <= e < n for e in erased):
        raise ValueError("erased site out of range")
    return erased + [k for k in range(n) if k not in erased]


def erased_mask(n: int, erased: Iterable[int]) -> tuple[int, ...]:
    es = set(prefix_order(n, erased)) & set(erased)
    return tuple(int(k in es) for k in range(n))


def _weights(params: WCodeParams, weights: Iterable[int] | None) -> set[int]:
    return {params.N_e} if weights is None else set(int(w) for w in weights)


def decoder(params: WCodeParams, completion: str = "fixed", weights: Iterable[int] | None = None) -> QuantumChannel:
    """Known-erasure decoder from ``X (x) P`` to ``L`` with Kraus ``<s| (x) <j|_{P_s} (x) V^(n-|s|)dag``.

    Bit strings ``s`` of Hamming weight in ``weights`` (default ``{N_e}``) are
    decoded. The remaining input subspace is handled by ``completion``:
    ``"fixed"`` prepares ``|0>_L``, ``"mixed"`` prepares ``I/d_L``, and
    ``"none"`` leaves the trace-non-increasing instrument branch alone.
    """
    d = _finite(params)
    n = params.n
    if completion not in ("fixed", "mixed", "none"):
        raise ValueError(f"unknown completion {completion!r}")
    dim_in = 2**n * params.dim
    if dim_in > DECODER_CAP:
        raise ValueError(f"decoder input dimension {dim_in} exceeds the dense cap {DECODER_CAP}")
    ws = _weights(params, weights)
    kraus = []
    complement = []  # orthonormal vectors of X (x) P left undecoded
    eye_p = np.eye(params.dim)
    for bits in itertools.product((0, 1), repeat=n):
        reg = np.zeros(2**n)
        reg[int("".join(map(str, bits)), 2)] = 1.0
        if sum(bits) in ws and not all(bits):
            ops = sector_kraus(params, bits)
            kraus += [np.kron(reg[None, :], op) for op in ops]
            covered = sum(dag(op) @ op for op in ops)
            w, v = np.linalg.eigh(eye_p - covered)
            rest = v[:, w > 0.5]
        else:
            rest = eye_p
        complement += [np.kron(reg, col) for col in rest.T]
    shape_in = (2**n,) + params.shape
    if completion == "none":
        return QuantumChannel(np.array(kraus), shape_in, (d,), trace_preserving=False)
    targets = [np.eye(d)[0][:, None]] if completion == "fixed" else [np.eye(d)[l][:, None] / np.sqrt(d) for l in range(d)]
    for q in complement:
        for t in targets:
            kraus.append(t @ q.conj()[None, :])
    return QuantumChannel(np.array(kraus), shape_in, (d,))


@dataclass
class SimulationResult:
    decoded: np.ndarray
    fidelity: float
    success_probability: float


def simulate_known_erasure(
    psi,
    params: WCodeParams,
    s: Sequence[int],
    completion: str = "none",
    method: str = "structured",
) -> SimulationResult:
    """Encode ``psi``, erase the sites flagged in ``s`` (known erasure), decode.

    ``fidelity`` is ``<psi| decoded |psi>``, which is the Uhlmann fidelity with
    the pure input; with ``completion="none"`` the decoded operator is the
    subnormalized output of the decoding branch and ``success_probability`` its trace.

    ``method="dense"`` pushes the density matrix through the three dense
    channels; ``"structured"`` keeps the classical register symbolic and works
    on state vectors, which reaches much larger codes.
    """
    d = _finite(params)
    s = _bits(s, params.n)
    if sum(s) != params.N_e:
        raise ValueError("the erasure pattern must have weight N_e")
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.shape != (d,) or abs(np.linalg.norm(psi) - 1) > 1e-9:
        raise ValueError("psi must be a normalized logical state vector")
    if method == "dense":
        rho = apply(encoder(params), proj(psi))
        rho = apply(known_erasure_channel(params.shape, s), rho)
        dec = decoder(params, completion)
        out = apply(dec, rho)
        succ = float(np.trace(apply(decoder(params, "none"), rho)).real)
    elif method == "structured":
        out, succ = _structured(psi, params, s, completion)
    else:
        raise ValueError(f"unknown method {method!r}")
    fid = float(np.real(psi.conj() @ out @ psi))
    return SimulationResult(out, fid, succ)


def _structured(psi, params: WCodeParams, s, completion):
    d = _finite(params)
    n = params.n
    if params.dim > VECTOR_CAP:
        raise ValueError("code too large for vector simulation")
    vec = _isometry(n, d) @ psi
    t = vec.reshape(params.shape).transpose(prefix_order(n, [i for i, b in enumerate(s) if b]))
    kept = [i for i, b in enumerate(s) if not b]
    rows = t.reshape(-1, (d + 1) ** len(kept))  # unnormalized kept-system branches
    vdag = dag(_isometry(len(kept), d))
    branches = rows @ vdag.T  # V^dag r_j for each erased basis state j
    out = branches.T @ branches.conj()
    succ = float(np.trace(out).real)
    lost = max(0.0, 1.0 - succ)
    if completion == "fixed":
        out = out + lost * proj(np.eye(d)[0])
    elif completion == "mixed":
        out = out + lost * np.eye(d) / d
    elif completion != "none":
        raise ValueError(f"unknown completion {completion!r}")
    return out, succ


def sweep_fig2(n_values: Iterable[int], ne_values: Iterable[int], d_L: float = math.inf) -> list[tuple]:
    """Rows ``(n, N_e, d_L, epsilon_min, faist_bound)`` ordered by ``(N_e, n)``.

    The comparison bound uses ``d_L = 2`` (one encoded qubit) when ``d_L`` is inf.
    """
    rows = []
    for ne in sorted(set(ne_values)):
        for n in sorted(set(n_values)):
            if not 0 <= ne < n:
                raise ValueError(f"invalid pair n={n}, N_e={ne}")
            p = WCodeParams(n, d_L, ne)
            fb = comparison_bound(n, 2 if d_L == math.inf else d_L)
            rows.append((n, ne, d_L, analytic_epsilon_min(p), fb))
    return rows
