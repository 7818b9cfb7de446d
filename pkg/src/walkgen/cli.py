"""Command line front end.

Exit codes: 0 success, 1 domain or input error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as wio
from .chain import chain_to_edge_model, edge_model_to_chain
from .errors import ResidualTooLarge, WalkgenError
from .families import make_family
from .genfun import eval_T, eval_T_directed, neumann_T
from .scattering import (
    bc_from_M,
    fourier_quadrature,
    fourier_series_S,
    fourier_walk_coefficient,
    solve_scattering,
)
from .stats import (
    aggregate,
    length_report,
    reflections_report,
    simulate,
    transitions_report,
    traversals_report,
    visits_report,
)
from .transition import assemble_big_m, classify
from .walks import series_T


class DomainError(Exception):
    pass


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("WALKGEN_THREADS", "1")))
    except ValueError:
        return 1


def _need_matrices(g, mc, path):
    if mc is None:
        raise DomainError(f"{path}: graph file has no 'matrices' section")
    return mc


def _betas(args):
    if args.beta_linspace is not None:
        start, stop, count = args.beta_linspace
        n = int(count)
        if n < 1 or n != count:
            raise DomainError("linspace count must be a positive integer")
        return list(np.linspace(start, stop, n)), True
    if args.beta is None:
        raise DomainError("give --beta or --beta-linspace")
    return [args.beta], False


def _emit(out, fmt, header, rows, lines):
    if fmt == "csv":
        out.write(wio.csv_text(header, rows))
    else:
        for line in lines:
            out.write(line + "\n")


# -- eval ----------------------------------------------------------------


def cmd_eval(args, out):
    g, mc = wio.load_graph(args.graph)
    mc = _need_matrices(g, mc, args.graph)
    betas, sweep = _betas(args)
    big = assemble_big_m(g, mc)
    directed = wio.penalties_from_record(g, wio.read_json(args.directed)) if args.directed else None

    def one(beta):
        if args.method == "closed":
            if directed is not None:
                r = eval_T_directed(g, big, beta, *directed)
            else:
                r = eval_T(g, big, beta)
            return r.value, f"rcond={r.rcond:.3e}"
        if args.method == "neumann":
            r = neumann_T(g, big, beta, args.nmax)
            return r.value, f"terms={args.nmax} remainder_bound={r.bound:.3e}"
        if directed is not None:
            from .walks import series_T_directed

            r = series_T_directed(g, mc, beta, args.nmax, *directed, relevant_only=True)
        else:
            r = series_T(g, mc, beta, args.nmax, relevant_only=True)
        return r.value, f"nmax={args.nmax} tail_bound={r.tail_bound:.3e} walks={r.walk_count}"

    if len(betas) > 1 and _workers() > 1:
        with ThreadPoolExecutor(max_workers=_workers()) as ex:
            results = list(ex.map(one, betas))
    else:
        results = [one(b) for b in betas]

    ids = g.external_ids
    rows, lines = [], []
    for beta, (T, diag) in zip(betas, results):
        lines.append(f"# beta={wio.format_complex(beta)} method={args.method} {diag}")
        for a, e in enumerate(ids):
            for b, ep in enumerate(ids):
                z = T[a, b]
                row = [e, ep, float(z.real), float(z.imag)]
                rows.append(([float(np.real(beta))] if sweep else []) + row)
                lines.append(f"T[{e},{ep}] = {wio.format_complex(z)}")
    header = (["beta"] if sweep else []) + ["e", "eprime", "re", "im"]
    _emit(out, args.format, header, rows, lines)


# -- count ---------------------------------------------------------------


def cmd_count(args, out):
    rows, lines = [], []
    for n in args.n:
        g, mc = make_family(args.family, n)
        T = eval_T(g, mc, 0.0)
        z = T["e", "e'"]
        k = round(z.real)
        if abs(z - k) > 1e-6:
            raise ResidualTooLarge(f"T(0) = {z} is not an integer (residual {abs(z - k):.3g})")
        rows.append([args.family, n, k])
        lines.append(str(k))
    _emit(out, args.format, ["family", "n", "count"], rows, lines)


# -- stats ---------------------------------------------------------------


def _stats_report(args, g, mc, beta):
    what = args.what
    if what == "length":
        return length_report(g, mc, beta)
    if what in ("visits", "reflections"):
        if not args.at or len(args.at) != 1:
            raise DomainError(f"--what {what} needs --at VERTEX")
        f = visits_report if what == "visits" else reflections_report
        return f(g, mc, beta, args.at[0])
    if what == "transitions":
        if not args.at or len(args.at) != 3:
            raise DomainError("--what transitions needs --at VERTEX OUT IN")
        return transitions_report(g, mc, beta, *args.at)
    if what == "traversals":
        if not args.edge:
            raise DomainError("--what traversals needs --edge LINE")
        return traversals_report(g, mc, beta, args.edge)
    raise DomainError(f"unknown quantity {what!r}")


def _mc_value(sim, args, e):
    if args.what == "length":
        return sim.mean_length(e)
    if args.what == "visits":
        return sim.mean_visits(e, args.at[0])
    if args.what == "traversals":
        return sim.mean_traversals(e, args.edge)
    return None


def cmd_stats(args, out):
    g, mc = wio.load_graph(args.graph)
    mc = _need_matrices(g, mc, args.graph)
    beta = args.beta
    rep = _stats_report(args, g, mc, beta)
    ids = g.external_ids
    header = ["e", "eprime", "re", "im"]
    rows, lines = [], [f"# {rep.kind} beta={wio.format_complex(beta)} method={rep.method}"]
    sims = {}
    if args.mc:
        header += ["mc_mean", "mc_stderr"]
        for ep in ids:
            sims[ep] = simulate(g, mc, ep, beta.real, args.mc, args.step_cap, args.seed, args.shards)
            if sims[ep].censored:
                lines.append(f"# source {ep}: {sims[ep].censored} of {args.mc} walks censored")
    for a, e in enumerate(ids):
        for b, ep in enumerate(ids):
            z = rep.values[a, b]
            row = [e, ep, float(z.real), float(z.imag)]
            line = f"<{args.what}>[{e},{ep}] = {wio.format_complex(z)}"
            if args.mc:
                mv = _mc_value(sims[ep], args, e)
                if mv is None:
                    mv = (float("nan"), float("nan"))
                row += [float(mv[0]), float(mv[1])]
                line += f"   monte carlo {mv[0]:.6g} +- {mv[1]:.2g}"
            rows.append(row)
            lines.append(line)
    if args.aggregate:
        mode = {"src": "bullet_source", "sink": "bullet_sink", "both": "bullet_both"}[args.aggregate]
        for e in ids if mode != "bullet_both" else [None]:
            try:
                val = aggregate(rep, mode, e)
            except WalkgenError as exc:
                lines.append(f"# aggregate {mode} {e}: {exc}")
                continue
            lines.append(f"<{args.what}>[{mode}{'' if e is None else ' ' + e}] = {wio.format_complex(val)}")
            rows.append([mode, e or "", float(np.real(val)), float(np.imag(val))] + ([""] * 2 if args.mc else []))
    _emit(out, args.format, header, rows, lines)


# -- scatter -------------------------------------------------------------


def cmd_scatter(args, out):
    g, mc = wio.load_graph(args.graph)
    k = wio.parse_complex(args.k)
    if args.bc:
        bc = wio.bc_from_record(g, wio.read_json(args.bc))
    elif args.bc_from_m is not None:
        bc = bc_from_M(_need_matrices(g, mc, args.graph), args.bc_from_m)
    else:
        raise DomainError("give --bc FILE or --bc-from-m BETA")
    res = solve_scattering(g, bc, k)
    ids = g.external_ids
    # unitarity only holds on the real axis
    defect = f"{res.unitarity_defect:.3e}" if k.imag == 0 else "n/a"
    rows, lines = [], [f"# k={wio.format_complex(k)} unitarity_defect={defect} method={res.method}"]
    for a, e in enumerate(ids):
        for b, ep in enumerate(ids):
            z = res.S[a, b]
            rows.append(["S", e, ep, float(z.real), float(z.imag)])
            lines.append(f"S[{e},{ep}] = {wio.format_complex(z)}")
    if args.fourier is not None:
        coef = fourier_walk_coefficient(g, bc, k, args.fourier)
        tag = "walk_coef(" + ",".join(map(str, args.fourier)) + ")"
        for a, e in enumerate(ids):
            for b, ep in enumerate(ids):
                z = coef[a, b]
                rows.append([tag, e, ep, float(z.real), float(z.imag)])
                lines.append(f"{tag}[{e},{ep}] = {wio.format_complex(z)}")
    if args.series is not None:
        r = fourier_series_S(g, bc, k, args.series)
        lines.append(f"# walk series nmax={args.series} tail_bound={r.tail_bound:.3e}")
        for a, e in enumerate(ids):
            for b, ep in enumerate(ids):
                z = r.value[a, b]
                rows.append([f"series({args.series})", e, ep, float(z.real), float(z.imag)])
                lines.append(f"series[{e},{ep}] = {wio.format_complex(z)}")
    if args.quadrature is not None:
        q = fourier_quadrature(g, bc, k.real, args.quadrature, args.mesh)
        w = fourier_walk_coefficient(g, bc, k.real, args.quadrature)
        tag = "quadrature(" + ",".join(map(str, args.quadrature)) + ")"
        lines.append(f"# mesh={args.mesh} max|quadrature - walk coefficient| = {np.abs(q - w).max():.3e}")
        for a, e in enumerate(ids):
            for b, ep in enumerate(ids):
                z = q[a, b]
                rows.append([tag, e, ep, float(z.real), float(z.imag)])
                lines.append(f"{tag}[{e},{ep}] = {wio.format_complex(z)}   walk sum {wio.format_complex(w[a, b])}")
    _emit(out, args.format, ["quantity", "e", "eprime", "re", "im"], rows, lines)


# -- convert / validate --------------------------------------------------


def cmd_convert(args, out):
    rec = wio.read_json(args.input)
    if args.puncture:
        chain = wio.chain_from_record(rec)
        g, mc = chain_to_edge_model(chain, args.puncture)
        text = wio.dumps(wio.graph_record(g, mc))
    elif args.to_chain:
        g, mc = wio.graph_from_record(rec)
        mc = _need_matrices(g, mc, args.input)
        chain = edge_model_to_chain(g, mc, args.v_inf)
        text = wio.dumps(wio.chain_record(chain))
    else:
        raise DomainError("give --puncture VERTEX or --to-chain")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)


def cmd_validate(args, out):
    rec = wio.read_json(args.input)
    if "P" in rec:
        chain = wio.chain_from_record(rec)
        out.write(f"valid vertex chain: {len(chain.vertices)} vertices, {len(chain.lines)} lines\n")
        return
    g, mc = wio.graph_from_record(rec)
    out.write(
        f"valid graph: {len(g.vertices)} vertices, {len(g.internal)} internal lines, "
        f"{len(g.external)} external lines\n"
    )
    if mc is not None:
        f = classify(mc)
        flags = ", ".join(f"{k}={getattr(f, k)}" for k in f.__dataclass_fields__)
        out.write(f"matrices: {flags}\n")


# -- parser --------------------------------------------------------------


def _complex_arg(s):
    try:
        return wio.parse_complex(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="walkgen", description="Generating functions of walks on metric graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    def fmt(sp):
        sp.add_argument("--format", choices=["table", "csv"], default="table")

    sp = sub.add_parser("eval", help="evaluate T(beta)")
    sp.add_argument("graph")
    grp = sp.add_mutually_exclusive_group()
    grp.add_argument("--beta", type=_complex_arg)
    grp.add_argument("--beta-linspace", nargs=3, type=float, metavar=("START", "STOP", "COUNT"))
    sp.add_argument("--method", choices=["closed", "neumann", "series"], default="closed")
    sp.add_argument("--nmax", type=int, default=60)
    sp.add_argument("--directed", metavar="PENALTY_FILE")
    fmt(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("count", help="count lattice paths of a family")
    sp.add_argument("--family", required=True, choices=["catalan", "schroeder", "dyck", "motzkin"])
    sp.add_argument("--n", required=True, type=int, nargs="+")
    fmt(sp)
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("stats", help="mean values of random walks")
    sp.add_argument("graph")
    sp.add_argument("--beta", type=_complex_arg, required=True)
    sp.add_argument("--what", required=True, choices=["length", "transitions", "visits", "traversals", "reflections"])
    sp.add_argument("--at", nargs="+", metavar="ID")
    sp.add_argument("--edge")
    sp.add_argument("--aggregate", choices=["src", "sink", "both"])
    sp.add_argument("--mc", type=int, default=0, metavar="N")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--shards", type=int, default=1)
    sp.add_argument("--step-cap", type=int, default=1_000_000)
    fmt(sp)
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("scatter", help="scattering matrix of the graph Laplacian")
    sp.add_argument("graph")
    sp.add_argument("--k", required=True)
    grp = sp.add_mutually_exclusive_group()
    grp.add_argument("--bc-from-m", type=float, metavar="BETA")
    grp.add_argument("--bc", metavar="BC_FILE")
    sp.add_argument("--fourier", type=int, nargs="+", metavar="N")
    sp.add_argument("--series", type=int, metavar="NMAX")
    sp.add_argument("--quadrature", type=int, nargs="+", metavar="N")
    sp.add_argument("--mesh", type=int, default=256)
    fmt(sp)
    sp.set_defaults(func=cmd_scatter)

    sp = sub.add_parser("convert", help="convert between vertex chains and edge models")
    sp.add_argument("input")
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--puncture", metavar="VERTEX")
    grp.add_argument("--to-chain", action="store_true")
    sp.add_argument("--v-inf", default="v_inf")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("validate", help="check a graph or chain file")
    sp.add_argument("input")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args, out)
    except (WalkgenError, DomainError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
