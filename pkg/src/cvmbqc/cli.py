"""Command-line interface: reproduce the comparison curves as CSV artifacts,
regenerate the optimized-basis cache, and run the verification suites.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 cache miss.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__, gates, gkp, lattice as lat, optimizer, oracle
from .errors import CacheMissError
from .reduction import noise_factors

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_CACHE = 3

LATTICES = ("DBSL", "BSL", "MBSL", "QRL")
GATES = ("I", "F", "P1", "FFCZ")


def _db_grid(args):
    n = int(round((args.db_max - args.db_min) / args.db_step))
    grid = [args.db_min + i * args.db_step for i in range(n + 1)]
    if not grid or grid[-1] > args.db_max + 1e-9:
        raise ValueError("empty or inconsistent squeezing grid")
    return grid


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _fmt_perr(p: float) -> str:
    return f"{p:.9e}"


def _write_csv(path, header, rows):
    out = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        w = csv.writer(out)
        w.writerow(header)
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()


def _plan_for(lattice, gate, db, table):
    r = lat.db_to_r(db)
    if gate == "FFCZ":
        return gates.cz_plan(lattice, db, table=table)
    if gate == "SWAP":
        if lattice != "DBSL":
            raise ValueError("the swap-gate cost analysis is a DBSL plan")
        return gates.dbsl_swap_plan(r)
    return gates.basis_for(lattice, gate, r)


def cmd_noise_curve(args) -> int:
    grid = _db_grid(args)
    table = None
    rows = []
    for db in grid:
        r = lat.db_to_r(db)
        rows.append(["reference", "resource", _fmt(db), "p", _fmt(-db)])
        eff = 10.0 * math.log10(2.0 * lat.effective_epsilon(r) / 2.0)
        rows.append(["reference", "effective", _fmt(db), "p", _fmt(eff)])
        for lattice in args.lattice:
            for gate in args.gate:
                if gate == "FFCZ" and lattice != "QRL":
                    if table is None:
                        table = gates.load_basis_table()
                plan = _plan_for(lattice, gate, db, table)
                sigma2 = noise_factors(gates.realize(plan)) * lat.effective_epsilon(r) / 2.0
                names = (["x", "p"] if len(sigma2) == 2 else ["x1", "x2", "p1", "p2"])
                for name, v in zip(names, sigma2):
                    rows.append([lattice, gate, _fmt(db), name,
                                 _fmt(10.0 * math.log10(2.0 * v))])
    rows.sort(key=lambda row: (row[0], row[1], float(row[2]), row[3]))
    _write_csv(args.out, ["lattice", "gate", "squeezing_db", "quadrature",
                          "noise_variance_db"], rows)
    return EXIT_OK


def cmd_error_curve(args) -> int:
    grid = _db_grid(args)
    table = None
    rows = []
    for db in grid:
        r = lat.db_to_r(db)
        delta = math.exp(-2.0 * r) / 2.0
        baseline = gkp.error_probability(
            np.array([2 * delta, 2 * delta, delta, delta]), delta)
        rows.append(["baseline", "FFCZ", _fmt(db), _fmt_perr(baseline)])
        for lattice in args.lattice:
            for gate in args.gate:
                if gate == "FFCZ" and lattice != "QRL":
                    if table is None:
                        table = gates.load_basis_table()
                plan = _plan_for(lattice, gate, db, table)
                rows.append([lattice, gate, _fmt(db),
                             _fmt_perr(gkp.gate_error_probability(plan))])
    rows.sort(key=lambda row: (row[0], row[1], float(row[2])))
    _write_csv(args.out, ["lattice", "gate", "squeezing_db", "perr"], rows)
    return EXIT_OK


def cmd_compare(args) -> int:
    grid = _db_grid(args)
    table = gates.load_basis_table()
    rows = []
    for db in grid:
        ref = gkp.gate_error_probability(gates.cz_plan("DBSL", db, table=table))
        for lattice in LATTICES:
            plan = gates.cz_plan(lattice, db, table=table)
            ratio = gkp.gate_error_probability(plan) / ref
            rows.append([lattice, _fmt(db), _fmt(ratio)])
    rows.sort(key=lambda row: (row[0], float(row[1])))
    _write_csv(args.out, ["lattice", "squeezing_db", "perr_ratio_vs_dbsl"], rows)
    return EXIT_OK


def cmd_optimize(args) -> int:
    grid = _db_grid(args)
    if args.config:
        with open(args.config) as fh:
            cfg = optimizer.OptimizerConfig.from_dict(json.load(fh))
    else:
        cfg = optimizer.OptimizerConfig()
    if args.seed is not None:
        cfg = optimizer.OptimizerConfig(**{**cfg.__dict__, "seed": args.seed})
    try:
        table = gates.load_basis_table(args.out)
    except CacheMissError:
        table = {"version": 1, "package": __version__, "entries": []}
    entries = [row for row in table["entries"]
               if not (row["lattice"] == args.lattice
                       and bool(row.get("variable_theta_c")) == args.variable_theta_c
                       and any(abs(row["squeezing_db"] - db) < 1e-9 for db in grid))]
    warm = []
    for db in grid:
        r = lat.db_to_r(db)
        run = optimizer.variable_theta_c_search if args.variable_theta_c \
            else optimizer.cz_search
        try:
            res = run(args.lattice, r, cfg, warm_starts=warm)
        except ValueError as exc:
            print(f"{args.lattice} {db:g} dB: {exc}", file=sys.stderr)
            return EXIT_USAGE
        flag = "accepted" if res.accepted else "INFEASIBLE"
        print(f"{args.lattice} {db:g} dB: {flag} residual={res.residual:.3e} "
              f"perr={res.perr:.6e}")
        entries.append(res.to_row(args.lattice, db, args.variable_theta_c))
        if res.accepted:
            full = list(res.angles) + ([res.theta_c] if args.variable_theta_c else [])
            warm = [np.array(full)]
    table["entries"] = sorted(
        entries, key=lambda e: (e["lattice"], bool(e.get("variable_theta_c")),
                                e["squeezing_db"]))
    path = gates.save_basis_table(table, args.out)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    reports = []
    ok = True
    for r in args.r:
        for plan in gates.iter_catalog(r):
            rep = oracle.verify_plan(plan, tol=args.tol)
            reports.append(rep)
            ok &= rep["pass"]
    table = gates.load_basis_table()
    rows = [row for row in table["entries"]
            if row.get("accepted") and not row.get("variable_theta_c")]
    for row in rows[::max(1, args.cache_stride)]:
        plan = gates.cz_plan(row["lattice"], row["squeezing_db"], table=table)
        rep = oracle.verify_plan(plan, tol=args.tol)
        rep["plan"] = f"{row['lattice']}:FFCZ@{row['squeezing_db']:g}dB"
        reports.append(rep)
        ok &= rep["pass"]
    for lattice in ("DBSL", "BSL", "MBSL"):
        for r in (0.5, 1.5):
            rep = oracle.wigner_limit_check(lattice, r)
            reports.append(rep)
            ok &= rep["pass"]
        rep = oracle.wigner_limit_check(lattice, 1.0, t_override=0.0)
        reports.append(rep)
        ok &= rep["pass"]
    print(json.dumps({"pass": ok, "reports": reports}, indent=1))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_dump_graph(args) -> int:
    r = lat.db_to_r(args.db)
    params = lat.LatticeParams.from_r(args.lattice, r)
    build = lat.cz_region_graph if args.region == "cz" else lat.single_step_graph
    graph = build(params, parity=args.parity, theta_c=args.theta_c)
    text = lat.graph_to_json(graph, indent=1)
    if args.out in (None, "-"):
        print(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return EXIT_OK


def _add_grid_args(p, db_min=0.25, db_max=25.0, db_step=0.25):
    p.add_argument("--db-min", type=float, default=db_min)
    p.add_argument("--db-max", type=float, default=db_max)
    p.add_argument("--db-step", type=float, default=db_step)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cvmbqc",
        description="Gate noise and GKP error analysis on 2D CV cluster states")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("noise-curve", help="gate-noise variances vs squeezing (CSV)")
    p.add_argument("--lattice", nargs="+", default=list(LATTICES), choices=LATTICES)
    p.add_argument("--gate", nargs="+", default=["I", "F", "P1"],
                   choices=GATES + ("SWAP",))
    _add_grid_args(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_noise_curve)

    p = sub.add_parser("error-curve", help="GKP error probabilities vs squeezing (CSV)")
    p.add_argument("--lattice", nargs="+", default=list(LATTICES), choices=LATTICES)
    p.add_argument("--gate", nargs="+", default=list(GATES), choices=GATES)
    _add_grid_args(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_error_curve)

    p = sub.add_parser("compare", help="CZ error probability relative to the DBSL (CSV)")
    _add_grid_args(p, db_min=8.0, db_max=21.0, db_step=0.5)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("optimize", help="optimize CZ bases and update the cache")
    p.add_argument("--lattice", required=True, choices=("DBSL", "BSL", "MBSL", "QRL"))
    _add_grid_args(p, db_min=15.0, db_max=15.0, db_step=0.5)
    p.add_argument("--config", help="JSON file with OptimizerConfig fields")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--variable-theta-c", action="store_true")
    p.add_argument("--out", default=None,
                   help="basis-table path (default: the active cache location)")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("verify", help="run the oracle verification suite")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--r", nargs="+", type=float, default=[0.25, 0.5, 1.0, 1.5, 2.0])
    p.add_argument("--cache-stride", type=int, default=8,
                   help="verify every Nth cached CZ row (1 = all)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dump-graph", help="emit a region graph as JSON")
    p.add_argument("--lattice", required=True,
                   choices=("TELEPORT",) + tuple(LATTICES))
    p.add_argument("--db", type=float, default=15.0)
    p.add_argument("--parity", type=int, default=0, choices=(0, 1))
    p.add_argument("--theta-c", type=float, default=None)
    p.add_argument("--region", choices=("step", "cz"), default="step")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_dump_graph)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CacheMissError as exc:
        print(f"cache miss: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
