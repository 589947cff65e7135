"""Command-line entry point: ``movoid {table,build,verify,reduce,search,stats}``.

Exit codes: 0 success, 1 falsified claim (or no solution when one was
expected), 2 usage or parse error, 3 budget or resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

from .admissibility import admissible_report
from .certificates import ParseError, VerificationFailed, load_certificate, make_certificate
from .constructions import OneSystem, extract_line_spread, field_reduce, is_one_system
from .gf import NotAPrimePower, field_make, is_prime_power
from .ovoid import BasePointNotInSet, IdentityViolation, PointSet, intersection_histogram, line_stats
from .projgeom import ResourceLimit
from .quadric import DEFAULT_MAX_GENERATORS, DEFAULT_MAX_POINTS, quadric_make
from .search import BUDGET, FOUND, SearchProblem, default_threads, search

OK, FALSIFIED, USAGE, LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


SUBCOMMANDS = ("table", "build", "verify", "reduce", "search", "stats")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    output_format: str = "text"
    max_points: int = DEFAULT_MAX_POINTS
    max_generators: int = DEFAULT_MAX_GENERATORS
    threads: int = 1

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise UsageError(f"unknown subcommand {self.subcommand!r}")
        if self.max_points < 1 or self.max_generators < 1:
            raise UsageError("resource caps must be positive")
        if self.threads < 1:
            raise UsageError("--threads must be positive")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        skip = {"command", "func", "format", "max_points", "max_generators", "threads"}
        params = {k: v for k, v in vars(args).items() if k not in skip}
        threads = getattr(args, "threads", None)
        return cls(args.command, params, args.format, args.max_points, args.max_generators,
                   default_threads() if threads is None else threads)


def parse_range(text: str) -> list[int]:
    """'3', '2..5' (inclusive) or '2,3,7'."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            vals = list(range(int(lo), int(hi) + 1))
        else:
            vals = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}") from exc
    if not vals:
        raise UsageError(f"empty range {text!r}")
    return vals


def _emit(args, payload: dict, text: str | None = None) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text if text is not None else "\n".join(f"{k}: {v}" for k, v in payload.items()))


# -- subcommands ------------------------------------------------------------------------------

def cmd_table(args) -> int:
    qs = parse_range(args.q)
    rs = parse_range(args.r)
    if len(qs) == 1 and not is_prime_power(qs[0]):
        raise NotAPrimePower(f"{qs[0]} is not a prime power")
    # ranges silently skip non-prime-powers such as 6
    rows = [admissible_report(q, r) for q in qs if is_prime_power(q) for r in rs]
    if args.format == "json":
        print(json.dumps([row.as_dict() for row in rows], sort_keys=True))
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q", "r", "case", "residues", "lb_new", "lb_old", "admissible"])
        for row in rows:
            w.writerow([row.q, row.r, row.case, " ".join(map(str, row.residues)),
                        row.lower_bound_new, row.lower_bound_old,
                        " ".join(map(str, row.admissible))])
        sys.stdout.write(buf.getvalue())
    else:
        for row in rows:
            print(f"q={row.q} r={row.r} {row.case:14s} residues={list(row.residues)} "
                  f"lb={row.lower_bound_new}/{row.lower_bound_old} nontrivial={list(row.nontrivial)}")
    return OK


def cmd_build(args) -> int:
    Q = quadric_make(field_make(args.q), args.r, args.max_points)
    payload = {"descriptor": Q.descriptor(), "q": Q.q, "r": Q.r, "points": Q.k,
               "lines_through_point": len(Q.line_masks_through(0)) if Q.r >= 2 else 0}
    if args.generators:
        payload["generators"] = len(Q.generator_masks(args.max_generators))
    if args.emit:
        with open(args.emit, "w") as fh:
            fh.write(make_certificate(PointSet.full(Q)))
        payload["emitted"] = args.emit
    _emit(args, payload)
    return OK


def cmd_verify(args) -> int:
    try:
        cert = load_certificate(args.path, args.max_points, args.max_generators)
    except VerificationFailed as exc:
        _emit(args, {"path": args.path, "verified": False, "reason": str(exc)},
              f"FAILED: {exc}")
        return FALSIFIED
    payload = {"path": args.path, "verified": True, "claim": cert.claim,
               "descriptor": cert.quadric.descriptor()}
    if cert.m is not None:
        payload["m"] = cert.m
    if cert.points is not None:
        payload["size"] = cert.points.size
    if cert.lines:
        payload["lines"] = len(cert.lines)
    _emit(args, payload, f"verified {cert.claim} on {cert.quadric!r}")
    return OK


def cmd_reduce(args) -> int:
    if args.e < 2:
        raise UsageError("--e must be at least 2")
    if args.r < 1:
        raise UsageError("--r must be at least 1")
    big = args.q ** args.e
    if args.source:
        cert = load_certificate(args.source, args.max_points, args.max_generators)
        if cert.points is None:
            raise UsageError("source certificate must be an m-ovoid")
        src, S = cert.quadric, cert.points
        if (src.q, src.r) != (big, args.r):
            raise UsageError(f"source is over GF({src.q}) rank {src.r}, expected GF({big}) rank {args.r}")
    else:
        src = quadric_make(field_make(big), args.r, args.max_points)
        S = PointSet.full(src)
    T, m, frm = field_reduce(src, S, args.q, True, args.max_points, args.max_generators)
    text = make_certificate(T, m=m)
    payload = {"source": src.descriptor(), "target": frm.target.descriptor(),
               "m": m, "size": T.size}
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        payload["out"] = args.out
    if args.spread:
        if frm.target.r != 3:
            raise UsageError("--spread needs a rank-3 target")
        lines = extract_line_spread(frm.target, T)
        if lines is None or not is_one_system(frm.target, lines):
            _emit(args, {**payload, "one_system": False}, "no 1-system")
            return FALSIFIED
        with open(args.spread, "w") as fh:
            fh.write(make_certificate(OneSystem(frm.target, tuple(lines))))
        payload["one_system_lines"] = len(lines)
    if not args.out and args.format != "json":
        sys.stdout.write(text)
        return OK
    _emit(args, payload)
    return OK


def cmd_search(args) -> int:
    Q = quadric_make(field_make(args.q), args.r, args.max_points)
    seed = ()
    if args.mode == "m-ovoid":
        if args.m is None:
            raise UsageError("--m is required in m-ovoid mode")
        rep = admissible_report(args.q, args.r)
        if args.m not in rep.admissible and not args.force:
            raise UsageError(f"m={args.m} is not admissible for q={args.q}, r={args.r}; "
                             f"use --force to search anyway")
    if args.seed_from:
        cert = load_certificate(args.seed_from, args.max_points, args.max_generators)
        if cert.quadric is not Q:
            raise UsageError("seed certificate lives on a different quadric")
        if args.mode == "m-ovoid" and cert.points is None:
            raise UsageError("seed certificate must be an m-ovoid")
        items = cert.points.ids() if args.mode == "m-ovoid" else list(cert.lines)
        seed = tuple(items[:args.seed_count])
    try:
        problem = SearchProblem(
            Q, args.m or 0, args.mode, args.node_limit, args.time_limit,
            tangent_pruning=not args.no_tangent, capacity_pruning=not args.no_capacity,
            seed=seed, max_generators=args.max_generators)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = search(problem, args.threads)
    payload = out.as_dict(elapsed=args.elapsed)
    if out.status == FOUND and args.emit:
        with open(args.emit, "w") as fh:
            fh.write(make_certificate(out.witness, m=args.m if args.mode == "m-ovoid" else None))
    _emit(args, payload, f"{out.status} after {out.nodes} nodes")
    if out.status == BUDGET:
        return LIMIT
    if args.expect == "found" and out.status != FOUND:
        return FALSIFIED
    if args.expect == "none" and out.status == FOUND:
        return FALSIFIED
    return OK


def _parse_point(Q, text: str) -> int:
    try:
        vals = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad point {text!r}") from exc
    if len(vals) == 1:
        Q.check_point(vals[0])
        return vals[0]
    return Q.index_of(vals)


def cmd_stats(args) -> int:
    cert = load_certificate(args.certificate, args.max_points, args.max_generators)
    if cert.points is not None:
        S, m = cert.points, cert.m
    elif cert.lines:
        S = OneSystem(cert.quadric, tuple(cert.lines)).covered()
        m = cert.quadric.q + 1
    else:
        raise UsageError("stats needs an m-ovoid or 1-system certificate")
    Q = cert.quadric
    if Q.r < 2:
        raise UsageError("line statistics need rank at least 2")
    if args.point is not None:
        pts = [_parse_point(Q, args.point)]
    else:
        pts = S.ids()
        if not pts:
            raise BasePointNotInSet("the set is empty, so there is no base point")
    rows = []
    for p in pts:
        st = line_stats(Q, S, p, m)
        rows.append({"point": p, "coords": list(Q.point(p)), "sum_t": st.sum_t,
                     "sum_t_sq": st.sum_t_sq, "sum_t_t_minus_1": st.sum_t_t_minus_1,
                     "histogram": {str(k): v for k, v in intersection_histogram(Q, S, p).items()}})
    if args.point is not None:
        payload = rows[0]
    else:
        keys = ("sum_t", "sum_t_sq", "sum_t_t_minus_1")
        payload = {"points": len(rows), "m": m,
                   **{k: sorted({r[k] for r in rows}) for k in keys}}
        payload["histograms"] = [json.loads(h) for h in sorted(
            {json.dumps(r["histogram"], sort_keys=True) for r in rows})]
    _emit(args, payload)
    return OK


# -- parser ---------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--max-points", type=int, default=DEFAULT_MAX_POINTS)
    common.add_argument("--max-generators", type=int, default=DEFAULT_MAX_GENERATORS)

    ap = argparse.ArgumentParser(prog="movoid", description="m-ovoids of elliptic quadrics")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table", parents=[common], help="admissible m per (q, r)")
    p.add_argument("--q", required=True, help="value or range, e.g. 2..5")
    p.add_argument("--r", required=True, help="value or range, e.g. 2..3")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("build", parents=[common], help="construct Q^-(2r+1, q) and report sizes")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--generators", action="store_true", help="also enumerate generators")
    p.add_argument("--emit", help="write the all-points certificate here")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", parents=[common], help="verify a certificate from scratch")
    p.add_argument("path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce", parents=[common], help="field reduction Q^-(2r+1,q^e) -> GF(q)")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--e", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--source", help="m-ovoid certificate over GF(q^e); default all points")
    p.add_argument("--out", help="certificate path (default: stdout)")
    p.add_argument("--spread", help="also write the extracted 1-system certificate here")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("search", parents=[common], help="backtracking search")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--mode", choices=("m-ovoid", "one-system"), default="m-ovoid")
    p.add_argument("--node-limit", type=int, default=10_000_000)
    p.add_argument("--time-limit", type=float, default=600.0)
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default: available CPUs; 1 is serial)")
    p.add_argument("--force", action="store_true", help="search even if m is inadmissible")
    p.add_argument("--emit", help="write the witness certificate here when found")
    p.add_argument("--expect", choices=("found", "none"),
                   help="exit 1 if the outcome contradicts this")
    p.add_argument("--seed-from", help="certificate whose first points/lines are forced in")
    p.add_argument("--seed-count", type=int, default=20)
    p.add_argument("--no-tangent", action="store_true", help="disable tangent pruning")
    p.add_argument("--no-capacity", action="store_true", help="disable capacity pruning")
    p.add_argument("--elapsed", action="store_true", help="include wall time in the output")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("stats", parents=[common], help="line statistics at ovoid points")
    p.add_argument("certificate")
    p.add_argument("--point", help="local index or comma-separated coordinates")
    p.set_defaults(func=cmd_stats)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        config = RunConfig.from_args(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    if hasattr(args, "threads"):
        args.threads = config.threads
    try:
        return args.func(args)
    except ResourceLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return LIMIT
    except (UsageError, ParseError, NotAPrimePower, BasePointNotInSet, ValueError,
            OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return USAGE
    except (VerificationFailed, IdentityViolation) as exc:
        print(f"FAILED: {exc}", file=sys.stderr)
        return FALSIFIED


if __name__ == "__main__":
    sys.exit(main())
