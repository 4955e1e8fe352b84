"""Command-line front end: ``covcert {certify,sweep,hmin,asym,selftest}``.

Exit codes: 0 success (correctable / feasible), 3 negative verdict, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import asymmetry, certifier, minentropy, wstate
from .channels import channel_from_json, matrix_from_json

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 3


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _fmt(x) -> str:
    if isinstance(x, float):
        return "inf" if math.isinf(x) else f"{x:.12g}"
    return str(x)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def parse_kv(spec: str) -> dict:
    out = {}
    for part in spec.split(","):
        if "=" not in part:
            raise UsageError(f"expected key=value in {spec!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_dl(text: str) -> float | int:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    v = int(text)
    if v < 2:
        raise UsageError("d_L must be at least 2")
    return v


def parse_int_list(text: str) -> list[int]:
    """``"1,2,3"`` or an inclusive range ``"start:stop[:step]"``."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise UsageError(f"bad range {text!r}")
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1
        if step <= 0 or stop < start:
            raise UsageError(f"bad range {text!r}")
        return list(range(start, stop + 1, step))
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def _solver_kw(args) -> dict:
    return {"gap_tol": args.gap_tol, "max_iter": args.max_iter}


# -- subcommands ------------------------------------------------------------------


def cmd_certify(args) -> int:
    erased = [e - 1 for e in parse_int_list(args.erase)] if args.erase else []
    if any(e < 0 for e in erased):
        raise UsageError("--erase takes 1-based site indices")
    kw = dict(_solver_kw(args), verify_covariance=args.verify_covariance, seed=args.seed)
    if args.wstate:
        spec = parse_kv(args.wstate)
        if set(spec) - {"n", "dl"} or "n" not in spec:
            raise UsageError("--wstate expects n=<int>,dl=<int>")
        dl = parse_dl(spec.get("dl", "2"))
        if dl == math.inf:
            raise UsageError("certify needs a finite dl")
        params = wstate.WCodeParams(int(spec["n"]), dl, len(set(erased)))
        rep = certifier.certify_wstate(params, erased, args.epsilon, path=args.path, **kw)
    else:
        if not args.encoder:
            raise UsageError("give --wstate or --encoder")
        enc = channel_from_json(_load_json(args.encoder))
        if args.noise and args.erase:
            raise UsageError("give either --noise or --erase, not both")
        if args.noise:
            rep = certifier.certify(enc, channel_from_json(_load_json(args.noise)), args.epsilon, **kw)
        elif erased:
            rep = certifier.certify_erasure_transversal(enc, erased, args.epsilon, **kw)
        else:
            raise UsageError("give --noise or --erase")
    if rep.erased is not None:
        rep.erased = [e + 1 for e in rep.erased]  # report sites as given on the command line
    _emit(rep.to_json() + "\n", args.out)
    return EXIT_NEGATIVE if rep.verdict == "not_correctable" else EXIT_OK


def cmd_sweep(args) -> int:
    ns = parse_int_list(args.n)
    nes = parse_int_list(args.ne)
    if not ns or not nes:
        raise UsageError("empty --n or --ne")
    rows = wstate.sweep_fig2(ns, nes, parse_dl(args.dl))
    header = ["n", "N_e", "d_L", "epsilon_min", "faist_bound"]
    if args.format == "json":
        text = json.dumps([dict(zip(header, map(_fmt_json, r))) for r in rows], indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


def _fmt_json(x):
    if isinstance(x, float):
        return "inf" if math.isinf(x) else float(f"{x:.12g}")
    return x


def cmd_hmin(args) -> int:
    m = matrix_from_json(_load_json(args.matrix))
    dims = parse_int_list(args.dims)
    if len(dims) != 2:
        raise UsageError("--dims expects dA,dB")
    res = minentropy.hmin(m, dims[0], dims[1], **_solver_kw(args))
    out = {
        "hmin_bits": _fmt_json(res.hmin),
        "phi": _fmt_json(res.phi),
        "solver_gap": _fmt_json(res.solver_gap),
        "kkt_residual": _fmt_json(res.kkt_residual),
        "iterations": res.iterations,
    }
    if args.format == "csv":
        text = ",".join(out) + "\n" + ",".join(str(v) for v in out.values()) + "\n"
    else:
        text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_asym(args) -> int:
    q = asymmetry.ConversionQuery.from_json(_load_json(args.query))
    if args.epsilon is not None:
        q.epsilon = args.epsilon
        if not 0.0 <= q.epsilon <= 1.0:
            raise UsageError("epsilon must lie in [0, 1]")
    v = asymmetry.multi_state_conversion(q, gap_tol=args.gap_tol)
    _emit(json.dumps(v.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK if v.feasible else EXIT_NEGATIVE


def cmd_selftest(args) -> int:
    from .acceptance import run_all

    stream = io.StringIO() if args.out else sys.stdout
    results = run_all(seed=args.seed, stream=stream)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed", file=stream)
    if args.out:
        Path(args.out).write_text(stream.getvalue())
    return EXIT_OK if passed == len(results) else EXIT_NEGATIVE


# -- wiring -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gap-tol", type=float, default=1e-8)
    common.add_argument("--max-iter", type=int, default=100)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    p = _Parser(prog="covcert", description="Certify approximate error correction of covariant codes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("certify", parents=[common], help="epsilon-correctability of an encoder under noise")
    c.add_argument("--wstate", help="W-state code, e.g. n=100,dl=2")
    c.add_argument("--encoder", help="encoder channel JSON")
    c.add_argument("--noise", help="noise channel JSON")
    c.add_argument("--erase", help="1-based erased sites, e.g. 1,3")
    c.add_argument("--epsilon", type=float, default=None)
    c.add_argument("--verify-covariance", type=int, default=0, metavar="K")
    c.add_argument("--path", choices=("auto", "sdp", "analytic"), default="auto")
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("sweep", parents=[common], help="W-code epsilon_min table")
    s.add_argument("--n", required=True, help="inclusive range start:stop:step or list")
    s.add_argument("--ne", required=True, help="erased counts, e.g. 1,2,3")
    s.add_argument("--dl", default="inf", help="logical dimension or inf")
    s.set_defaults(func=cmd_sweep)

    h = sub.add_parser("hmin", parents=[common], help="conditional min-entropy of a matrix")
    h.add_argument("--matrix", required=True, help="JSON matrix (rows of numbers or [re, im] pairs)")
    h.add_argument("--dims", required=True, help="dA,dB")
    h.set_defaults(func=cmd_hmin)

    a = sub.add_parser("asym", parents=[common], help="covariant state-conversion query")
    a.add_argument("--query", required=True, help="ConversionQuery JSON")
    a.add_argument("--epsilon", type=float, default=None, help="override the query's epsilon")
    a.set_defaults(func=cmd_asym)

    t = sub.add_parser("selftest", parents=[common], help="run the acceptance checks")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.format == "csv" and args.command in ("certify", "asym"):
        print(f"covcert: error: {args.command} writes JSON only", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError, OSError, RuntimeError) as exc:
        print(f"covcert: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def run() -> None:
    sys.exit(main())
