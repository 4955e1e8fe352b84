"""A small dense primal-dual interior-point solver for semidefinite programs.

The standard pair is

    (P)  minimize  <C, X>   s.t.  <A_i, X> = b_i,  X >= 0
    (D)  maximize  b^T y    s.t.  sum_i y_i A_i + S = C,  S >= 0

over block-diagonal real symmetric matrices. Iterates follow the central
path using Nesterov-Todd scaling and Mehrotra's predictor-corrector step.
Complex Hermitian data enter through :func:`hermitian_block`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .linalg import embed_complex_as_real

STEP_FRACTION = 0.98


@dataclass
class SdpProblem:
    """Standard-form SDP data.

    ``C[k]`` is the objective block ``k`` (``n_k x n_k``) and ``A[k]`` stacks the
    constraint blocks with shape ``(m, n_k, n_k)``.
    """

    C: list[np.ndarray]
    A: list[np.ndarray]
    b: np.ndarray

    def __post_init__(self):
        self.C = [np.atleast_2d(np.asarray(c, dtype=float)) for c in self.C]
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        m = len(self.b)
        self.A = [np.asarray(a, dtype=float).reshape(m, *c.shape) for a, c in zip(self.A, self.C)]
        if len(self.A) != len(self.C):
            raise ValueError("one constraint stack per block is required")
        for c, a in zip(self.C, self.A):
            if c.shape[0] != c.shape[1]:
                raise ValueError("blocks must be square")
            if np.abs(c - c.T).max(initial=0) > 1e-10 or np.abs(a - a.transpose(0, 2, 1)).max(initial=0) > 1e-10:
                raise ValueError("SDP data must be symmetric")
        flat = np.concatenate([a.reshape(m, -1) for a in self.A], axis=1)
        if m and np.linalg.matrix_rank(flat) < m:
            warnings.warn("SDP constraint matrices are linearly dependent", stacklevel=2)

    @property
    def m(self) -> int:
        return len(self.b)

    @property
    def block_sizes(self) -> list[int]:
        return [c.shape[0] for c in self.C]


@dataclass
class SdpSolution:
    X: list[np.ndarray]
    y: np.ndarray
    S: list[np.ndarray]
    primal_value: float
    dual_value: float
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    complementarity: float
    iterations: int
    status: str
    xs_norm: float = 0.0
    history: list[tuple[float, float]] = field(default_factory=list, repr=False)

    @property
    def kkt_residual(self) -> float:
        return max(self.primal_infeasibility, self.dual_infeasibility, self.complementarity)


def hermitian_block(h) -> np.ndarray:
    """Real embedding of a Hermitian matrix scaled so that ``<block(h), block(g)> = tr(h g)``.

    A real PSD variable ``Z`` then pairs with data as ``<block(h), Z> = Re tr(h c)``
    where ``c = linalg.real_to_complex(Z)``.
    """
    return embed_complex_as_real(h) / 2


def _dot(blocks_a, blocks_b) -> float:
    return float(sum(np.vdot(a, b) for a, b in zip(blocks_a, blocks_b)))


def _nt_scaling(x, s):
    """Return (G, Ginv, lam) with G^T S G = Ginv X Ginv^T = diag(lam)."""
    lx = _chol(x)
    ls = _chol(s)
    u, sv, vt = np.linalg.svd(ls.T @ lx)
    root = np.sqrt(sv)
    g = lx @ vt.T / root
    lx_inv = sla.solve_triangular(lx, np.eye(len(x)), lower=True)
    ginv = (root[:, None] * vt) @ lx_inv
    return g, ginv, sv


def _chol(m):
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh((m + m.T) / 2)
        w = np.clip(w, 1e-300, None)
        _, r = np.linalg.qr((v * np.sqrt(w)).T)
        return r.T * np.sign(np.diag(r))


def _max_step(x, dx) -> float:
    lx = _chol(x)
    t = sla.solve_triangular(lx, dx, lower=True)
    t = sla.solve_triangular(lx, t.T, lower=True)
    e = np.linalg.eigvalsh((t + t.T) / 2)[0]
    return np.inf if e >= 0 else -1.0 / e


def solve(
    problem: SdpProblem,
    gap_tol: float = 1e-8,
    feas_tol: float = 1e-8,
    max_iter: int = 100,
) -> SdpSolution:
    """Solve the primal-dual pair with an infeasible-start interior-point method.

    ``gap`` in the result is ``|primal - dual| / max(1, |primal|)``; the
    infeasibilities and ``complementarity = <X, S>/(1 + |primal| + |dual|)``
    follow the DIMACS error measures.
    """
    C, A, b = problem.C, problem.A, problem.b
    m = problem.m
    flat = [a.reshape(m, -1) for a in A]
    ntot = sum(problem.block_sizes)

    def a_op(xs):
        return sum(f @ x.ravel() for f, x in zip(flat, xs)) if m else np.zeros(0)

    def at_op(y):
        return [np.tensordot(y, a, axes=1) if m else np.zeros_like(c) for a, c in zip(A, C)]

    cnorm = max(np.linalg.norm(c, 2) for c in C)
    bnorm = float(np.abs(b).max(initial=0.0))
    tau = 1.0 + max(cnorm, bnorm)
    X = [tau * np.eye(len(c)) for c in C]
    S = [tau * np.eye(len(c)) for c in C]
    y = np.zeros(m)
    cfro = np.sqrt(sum(np.sum(c * c) for c in C))

    history = []
    status = "max_iter"
    it = 0
    while True:
        rp = b - a_op(X)
        Rd = [c - a - s for c, a, s in zip(C, at_op(y), S)]
        pobj, dobj = _dot(C, X), float(b @ y)
        # DIMACS-style relative errors
        pinf = np.linalg.norm(rp) / (1 + np.linalg.norm(b))
        dinf = np.sqrt(sum(np.sum(r * r) for r in Rd)) / (1 + cfro)
        gap = abs(pobj - dobj) / max(1.0, abs(pobj))
        comp = _dot(X, S) / (1 + abs(pobj) + abs(dobj))
        history.append((pobj, dobj))
        if gap <= gap_tol and pinf <= feas_tol and dinf <= feas_tol and comp <= gap_tol:
            status = "optimal"
            break
        if it >= max_iter:
            break
        if max(max(np.abs(x).max() for x in X), max(np.abs(s).max() for s in S)) > 1e13:
            status = "infeasible"
            break
        it += 1

        mu = _dot(X, S) / ntot
        scal = [_nt_scaling(x, s) for x, s in zip(X, S)]
        W = [g @ g.T for g, _, _ in scal]
        M = np.zeros((m, m))
        for f, a, w in zip(flat, A, W):
            wa = np.matmul(np.matmul(w, a), w)
            M += f @ wa.reshape(m, -1).T
        M = (M + M.T) / 2
        try:
            factor = sla.cho_factor(M)
            msolve = lambda r: sla.cho_solve(factor, r)  # noqa: E731
        except np.linalg.LinAlgError:
            msolve = lambda r: np.linalg.lstsq(M, r, rcond=None)[0]  # noqa: E731
        wrw = a_op([w @ r @ w for w, r in zip(W, Rd)])

        def direction(rcs):
            q = []
            for (g, _, lam), rc in zip(scal, rcs):
                q.append(g @ (2 * rc / (lam[:, None] + lam[None, :])) @ g.T)
            dy = msolve(rp - a_op(q) + wrw)
            ds = [r - a for r, a in zip(Rd, at_op(dy))]
            dx = [qq - w @ d @ w for qq, w, d in zip(q, W, ds)]
            dx = [(d + d.T) / 2 for d in dx]
            ds = [(d + d.T) / 2 for d in ds]
            return dx, dy, ds

        def steps(dx, ds):
            ap = min(_max_step(x, d) for x, d in zip(X, dx))
            ad = min(_max_step(s, d) for s, d in zip(S, ds))
            return ap, ad

        # predictor
        rc_aff = [-np.diag(lam**2) for _, _, lam in scal]
        dxa, dya, dsa = direction(rc_aff)
        ap, ad = steps(dxa, dsa)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = _dot([x + ap * d for x, d in zip(X, dxa)], [s + ad * d for s, d in zip(S, dsa)]) / ntot
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))

        # corrector
        rcs = []
        for (g, ginv, lam), dx, ds in zip(scal, dxa, dsa):
            tx = ginv @ dx @ ginv.T
            ts = g.T @ ds @ g
            sym = (tx @ ts + ts @ tx) / 2
            rcs.append(sigma * mu * np.eye(len(lam)) - np.diag(lam**2) - sym)
        dx, dy, ds = direction(rcs)
        ap, ad = steps(dx, ds)
        ap, ad = min(1.0, STEP_FRACTION * ap), min(1.0, STEP_FRACTION * ad)

        X = [x + ap * d for x, d in zip(X, dx)]
        X = [(x + x.T) / 2 for x in X]
        y = y + ad * dy
        S = [s + ad * d for s, d in zip(S, ds)]
        S = [(s + s.T) / 2 for s in S]

    return SdpSolution(
        X=X,
        y=y,
        S=S,
        primal_value=pobj,
        dual_value=dobj,
        gap=gap,
        primal_infeasibility=pinf,
        dual_infeasibility=dinf,
        complementarity=comp,
        iterations=it,
        status=status,
        xs_norm=float(np.sqrt(sum(np.sum((x @ s) ** 2) for x, s in zip(X, S)))),
        history=history,
    )


def reduce_constraints(rows: np.ndarray, rhs: np.ndarray, rtol: float = 1e-10):
    """Replace a possibly dependent system ``rows @ x = rhs`` by an orthonormal independent one."""
    u, sv, vt = np.linalg.svd(rows, full_matrices=False)
    r = int(np.sum(sv > rtol * max(sv.max(initial=0.0), 1e-300)))
    new_rhs = (u[:, :r].T @ rhs) / sv[:r]
    if np.linalg.norm(rows @ (vt[:r].T @ new_rhs) - rhs) > 1e-8 * (1 + np.linalg.norm(rhs)):
        raise ValueError("linear constraints are inconsistent")
    return vt[:r], new_rhs


def write_sdpa(problem: SdpProblem, path) -> None:
    """Write the problem in SDPA sparse format.

    SDPA's primal ``min c^T x s.t. sum_i F_i x_i - F_0 >= 0`` is our dual with
    ``c = b``, ``F_i = A_i``, ``F_0 = -C`` and ``x = -y``, so SDPA reports the
    negated optimal value.
    """
    lines = [f"{problem.m}", f"{len(problem.C)}", " ".join(str(n) for n in problem.block_sizes)]
    lines.append(" ".join(repr(float(v)) for v in problem.b))
    mats = [[-c for c in problem.C]] + [[a[i] for a in problem.A] for i in range(problem.m)]
    for matno, blocks in enumerate(mats):
        for blk, mat in enumerate(blocks, start=1):
            iu, ju = np.triu_indices(len(mat))
            for i, j in zip(iu, ju):
                if mat[i, j] != 0.0:
                    lines.append(f"{matno} {blk} {i + 1} {j + 1} {float(mat[i, j])!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_sdpa(path) -> SdpProblem:
    tokens = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip() and ln[0] not in "*\""]
    m = int(tokens[0][0])
    nblocks = int(tokens[1][0])
    sizes = [abs(int(t)) for t in tokens[2][:nblocks]]
    b = np.array([float(t) for t in tokens[3][:m]])
    mats = [[np.zeros((n, n)) for n in sizes] for _ in range(m + 1)]
    for t in tokens[4:]:
        matno, blk, i, j, v = int(t[0]), int(t[1]) - 1, int(t[2]) - 1, int(t[3]) - 1, float(t[4])
        mats[matno][blk][i, j] = v
        mats[matno][blk][j, i] = v
    C = [-c for c in mats[0]]
    A = [np.array([mats[i + 1][k] for i in range(m)]).reshape(m, sizes[k], sizes[k]) for k in range(nblocks)]
    return SdpProblem(C, A, b)
