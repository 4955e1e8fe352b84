"""Acceptance checks shared by ``covcert selftest`` and the test suite.

Each check returns a :class:`Check` with a pass flag, the worst observed
deviation and the wall time. Solver diagnostics from checks 2, 5, 7 and 9 are
collected so that check 11 can audit them.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from contextlib import redirect_stdout
from dataclasses import dataclass, field

import numpy as np

from . import asymmetry, certifier, channels, groups, minentropy, wstate
from .linalg import kron, proj, random_density, random_psd, random_pure_state, random_unitary


@dataclass
class Check:
    number: int
    name: str
    passed: bool
    worst: float
    tolerance: float
    seconds: float
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (
            f"[{mark}] {self.number:2d} {self.name:<34s} worst={self.worst:.3e} "
            f"tol={self.tolerance:.1e} time={self.seconds:.2f}s {self.detail}".rstrip()
        )


@dataclass
class SolverLog:
    entries: list = field(default_factory=list)

    def add(self, source: str, gap: float, kkt: float):
        self.entries.append((source, float(gap), float(kkt)))

    def worst(self) -> tuple[float, float]:
        if not self.entries:
            return 0.0, 0.0
        return max(e[1] for e in self.entries), max(e[2] for e in self.entries)


def _wcode_grid():
    for n in range(2, 7):
        for d in (2, 3):
            for ne in (1, 2):
                if ne < n:
                    yield wstate.WCodeParams(n, d, ne)


def check_headline() -> Check:
    from .cli import main

    t = time.perf_counter()
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(["certify", "--wstate", "n=100,dl=2", "--erase", "1"])
    dt = time.perf_counter() - t
    rep = json.loads(buf.getvalue())
    dev = abs(rep["epsilon_min"] - 0.005)
    ok = code == 0 and dev <= 1e-12 and dt < 1.0 and rep["path"] == "analytic"
    return Check(1, "headline n=100 epsilon_min", ok, dev, 1e-12, dt, f"epsilon_min={rep['epsilon_min']}")


def check_closed_form(log: SolverLog) -> Check:
    t = time.perf_counter()
    worst = 0.0
    for p in _wcode_grid():
        rep = certifier.certify_wstate(p, path="sdp")
        log.add(f"cert{p.n},{p.d_L},{p.N_e}", rep.solver_gap, rep.kkt_residual)
        worst = max(worst, abs(rep.epsilon_min - wstate.analytic_epsilon_min(p)))
    dt = time.perf_counter() - t
    return Check(2, "SDP epsilon_min vs closed form", worst <= 1e-6 and dt < 120, worst, 1e-6, dt)


def check_recursion() -> Check:
    t = time.perf_counter()
    worst = 0.0
    for p in _wcode_grid():
        noise = channels.erasure_channel(p.shape, range(p.N_e))
        direct = channels.choi_state(channels.compose(noise, wstate.encoder(p))).matrix
        rec = wstate.choi_after_erasure_recursive(p).matrix
        worst = max(worst, float(np.linalg.norm(direct - rec)))
    return Check(3, "erasure Choi recursion", worst <= 1e-10, worst, 1e-10, time.perf_counter() - t)


def check_decoder(seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    t = time.perf_counter()
    worst, count = 0.0, 0
    for n in range(2, 9):
        for d in (2, 3):
            states = [random_pure_state(d, rng) for _ in range(16)]
            for w in range(0, 3):
                if w >= n:
                    continue
                p = wstate.WCodeParams(n, d, w)
                for erased in itertools.combinations(range(n), w):
                    s = wstate.erased_mask(n, erased)
                    for psi in states:
                        f = wstate.simulate_known_erasure(psi, p, s).fidelity
                        worst = max(worst, abs(f - (1 - w / n)))
                        count += 1
    dt = time.perf_counter() - t
    return Check(4, "known-erasure decoder fidelity", worst <= 1e-10, worst, 1e-10, dt, f"runs={count}")


def check_decompose(log: SolverLog, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    t = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        da = int(rng.integers(2, 4))
        db = int(rng.integers(2, 10))
        lam1, lam2 = rng.uniform(0.05, 2.0, size=2)
        low = random_psd(db, rng, rank=int(rng.integers(1, db + 1)))
        m = random_psd(da * db, rng, rank=int(rng.integers(1, da * db + 1)))
        fast = minentropy.phi_decompose(lam1, low, lam2, m, da)
        full = minentropy.hmin(lam1 * kron(np.eye(da), low) + lam2 * m, da, db)
        part = minentropy.hmin(m, da, db)
        log.add("decompose-full", full.solver_gap, full.kkt_residual)
        log.add("decompose-part", part.solver_gap, part.kkt_residual)
        worst = max(worst, abs(fast - full.phi) / full.phi)
    return Check(5, "Phi decomposition identity", worst <= 1e-6, worst, 1e-6, time.perf_counter() - t)


def check_haar(seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    t = time.perf_counter()
    cl = groups.clifford_group_1q()
    psi = random_pure_state(2, rng)
    exact = channels.g_twirl(kron(proj(psi).T, proj(psi)), cl, cl)
    dev_design = float(np.linalg.norm(exact - channels.haar_pair_twirl_state(2)))
    dev_mc = 0.0
    for d in (2, 3):
        psi = random_pure_state(d, rng)
        us = np.array([random_unitary(d, rng) for _ in range(512)])
        mc = channels.g_twirl(kron(proj(psi).T, proj(psi)), us, us)
        # entrywise: sampling noise at 512 draws is ~1e-2 per entry
        dev_mc = max(dev_mc, float(np.abs(mc - channels.haar_pair_twirl_state(d)).max()))
    ok = dev_design <= 1e-10 and dev_mc <= 2e-2
    return Check(
        6, "Haar second moment", ok, dev_design, 1e-10, time.perf_counter() - t,
        f"clifford={dev_design:.1e} monte_carlo={dev_mc:.1e} (tol 2e-2)",
    )


def _random_covariant_instances(seed: int):
    """(encoder, noise) pairs that are U(d)-covariant by construction."""
    rng = np.random.default_rng(seed)
    cl = groups.clifford_group_1q()
    rep = channels.GroupRep.same(cl)
    out = []
    for k in range(20):
        kind = k % 3
        if kind == 0:
            # Clifford twirl of a random qubit channel is depolarizing, hence U(2)-covariant
            kraus = [random_unitary(2, rng) * math.sqrt(w) for w in rng.dirichlet(np.ones(3))]
            noise = channels.twirl_channel(channels.QuantumChannel(np.array(kraus), (2,), (2,)), rep)
            out.append((channels.identity_channel((2,)), noise))
        elif kind == 1:
            d = 3
            out.append((channels.identity_channel((d,)), channels.depolarizing_channel(d, float(rng.uniform()))))
        else:
            n, d = 2, int(rng.integers(2, 4))
            p = wstate.WCodeParams(n, d)
            ch = channels.depolarizing_channel(d + 1, float(rng.uniform()))
            local = ch
            for _ in range(n - 1):
                local = channels.QuantumChannel(
                    np.array([np.kron(a, b) for a in local.kraus for b in ch.kraus]),
                    local.in_shape + ch.in_shape,
                    local.out_shape + ch.out_shape,
                )
            out.append((wstate.encoder(p), local))
    return out


def check_oracle(log: SolverLog, seed: int = 0) -> Check:
    t = time.perf_counter()
    worst = 0.0
    cases = itertools.chain(
        ((wstate.encoder(p), channels.erasure_channel(p.shape, range(p.N_e))) for p in _wcode_grid()),
        _random_covariant_instances(seed),
    )
    count = 0
    for enc, noise in cases:
        count += 1
        rep = certifier.certify(enc, noise)
        orc = certifier.decoder_choi_oracle(enc, noise, full=True)
        log.add("oracle-phi", rep.solver_gap, rep.kkt_residual)
        log.add("oracle-decoder", orc.solver_gap, orc.kkt_residual)
        worst = max(worst, abs(orc.value - rep.phi / rep.d_L))
    return Check(7, "decoder oracle equals Phi/d_L", worst <= 1e-6, worst, 1e-6, time.perf_counter() - t, f"instances={count}")


def check_ek_gap() -> Check:
    t = time.perf_counter()
    smallest = math.inf
    for n in range(2, 7):
        for d in (2, 3):
            for ne in range(1, n):
                p = wstate.WCodeParams(n, d, ne)
                rep = certifier.certify_wstate(p, path="sdp")
                smallest = min(smallest, rep.hmin_bits + math.log2(d))
    return Check(8, "exact Eastin-Knill gap", smallest > 1e-3, smallest, 1e-3, time.perf_counter() - t, "worst = smallest gap")


def asymmetry_reps():
    return [groups.z2_rep(), groups.cyclic_phase_rep(3), groups.s3_rep()]


def check_asymmetry(log: SolverLog, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    t = time.perf_counter()
    reps = asymmetry_reps()
    worst = 0.0
    mismatches = 0
    for k in range(50):
        rep = reps[k % 3]
        d = rep.d_in
        eta, rho = random_density(d, rng), random_density(d, rng)
        f = asymmetry.fidelity_of_distillation(eta, rho, rep, full=True)
        o = asymmetry.covariant_channel_oracle(eta, rho, rep, full=True)
        log.add("fidelity", f.solver_gap, f.kkt_residual)
        log.add("covariant-oracle", o.solver_gap, o.kkt_residual)
        worst = max(worst, abs(f.phi - o.value))
        psi = random_pure_state(d, rng)
        src = proj(psi) if k % 2 else rho
        if asymmetry.exact_pure_conversion(src, psi, rep) != asymmetry.approx_pure_conversion(src, psi, rep, 0.0):
            mismatches += 1
    ok = worst <= 1e-6 and mismatches == 0
    return Check(9, "asymmetry dual routes", ok, worst, 1e-6, time.perf_counter() - t, f"verdict_mismatches={mismatches}")


def check_sweep() -> Check:
    from .cli import main

    t = time.perf_counter()
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(["sweep", "--n", "10:200:10", "--ne", "1,2,3", "--dl", "inf"])
    rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
    worst, worst_rel, exact = 0.0, 0.0, True
    for r in rows:
        n, ne = int(r["n"]), int(r["N_e"])
        exact &= r["epsilon_min"] == f"{ne / n:.12g}"
        worst = max(worst, abs(float(r["epsilon_min"]) - ne / n))
        ref = (math.sqrt(2) + 2) / math.sqrt(n)
        worst_rel = max(worst_rel, abs(float(r["faist_bound"]) - ref) / ref)
    # the comparison column is printed to 12 significant digits
    ok = code == 0 and len(rows) == 60 and exact and worst <= 1e-12 and worst_rel <= 1e-11
    return Check(
        10, "sweep rows", ok, worst, 1e-12, time.perf_counter() - t,
        f"rows={len(rows)} bound_rel={worst_rel:.1e} (tol 1e-11)",
    )


def check_solver(log: SolverLog, elapsed: float) -> Check:
    gap, kkt = log.worst()
    ok = gap <= 1e-8 and kkt <= 1e-7 and elapsed < 600
    return Check(
        11, "solver health", ok, gap, 1e-8, elapsed,
        f"programs={len(log.entries)} max_kkt={kkt:.1e} (tol 1e-7) total<600s",
    )


def run_all(seed: int = 0, stream=None) -> list[Check]:
    log = SolverLog()
    start = time.perf_counter()
    steps = [
        check_headline,
        lambda: check_closed_form(log),
        check_recursion,
        lambda: check_decoder(seed),
        lambda: check_decompose(log, seed),
        lambda: check_haar(seed),
        lambda: check_oracle(log, seed),
        check_ek_gap,
        lambda: check_asymmetry(log, seed),
        check_sweep,
    ]
    results = []
    for step in steps:
        res = step()
        results.append(res)
        if stream is not None:
            print(res.line(), file=stream, flush=True)
    res = check_solver(log, time.perf_counter() - start)
    results.append(res)
    if stream is not None:
        print(res.line(), file=stream, flush=True)
    return results
