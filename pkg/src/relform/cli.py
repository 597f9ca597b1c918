"""Command line front end: ``relform {graphs,weights,lambda,coiso,star}``."""

from __future__ import annotations

import argparse
import functools
import itertools
import sys
from pathlib import Path

from .derived import is_coisotropic, structure_from_fourier
from .kontsevich import (DEFAULT_REPLICATES, DEFAULT_SAMPLES, GraphWeight, KGraph, enumerate_graphs,
                         weight)
from .parser import ParseError
from .quantize import (NotPoisson, a_infinity_residual, format_series, mu0_anomaly, residual_is_zero,
                       star_assemble)
from .specfile import SpecFileError, load_problem
from .weighted import evaluate_op


def _degrees(text: str) -> list:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"out-degrees must be comma separated integers, got {text!r}") from None


def cached_weight_fn(samples: int, replicates: int, seed: int):
    """Weights memoised on the canonical graph; the reordering sign is applied on the way out."""
    @functools.lru_cache(maxsize=None)
    def canonical_weight(g: KGraph) -> GraphWeight:
        return weight(g, samples, replicates, seed)

    def fn(graph: KGraph) -> GraphWeight:
        if not graph.is_admissible() or graph.n == 1:
            return weight(graph)
        sign, canon = graph.canonical()
        w = canonical_weight(canon)
        return w if sign == 1 else GraphWeight(-w.value, w.error, w.method, w.samples)

    return fn


def _weight_fn(args):
    return cached_weight_fn(args.samples, args.replicates, args.seed)


def _report_dir(args) -> Path | None:
    if args.report is None:
        return None
    d = Path(args.report)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _graph_list(args) -> list:
    if len(args.degrees) != args.n:
        raise SystemExit(f"error: {args.n} aerial vertices need {args.n} out-degrees, got {len(args.degrees)}")
    return enumerate_graphs(args.n, args.m, args.degrees, canonical_only=args.canonical)


def cmd_graphs(args) -> int:
    graphs = _graph_list(args)
    for g in graphs:
        print(g)
    out = _report_dir(args)
    if out:
        from . import report
        report.write_csv(out / "graphs.csv", ["index", "graph", "edges"],
                         [(i, str(g), g.n_edges) for i, g in enumerate(graphs)])
        hits = [0] * (args.n + args.m)
        for g in graphs:
            for _, t in g.edges:
                hits[t] += 1
        labels = [KGraph(args.n, args.m, ((),) * args.n).label(t) for t in range(args.n + args.m)]
        report.bar_plot(out / "graphs.png", labels, hits, title=f"edge targets over {len(graphs)} graphs",
                        ylabel="edges")
    return 0


def cmd_weights(args) -> int:
    graphs = _graph_list(args)
    fn = _weight_fn(args)
    rows = []
    for g in graphs:
        w = fn(g)
        print(f"{g} {w}")
        rows.append((str(g), str(w.value), float(w.value), w.error, w.method, w.samples))
    out = _report_dir(args)
    if out:
        from . import report
        report.write_csv(out / "weights.csv", ["graph", "value", "float", "error", "method", "samples"], rows)
        report.bar_plot(out / "weights.png", [r[0] for r in rows], [r[2] for r in rows], [r[3] for r in rows],
                        title=f"weights n={args.n} m={args.m}", ylabel="w")
    return 0


def _load(args):
    try:
        return load_problem(args.file)
    except (SpecFileError, ParseError, OSError) as e:
        raise SystemExit(f"error: {e}") from None


def cmd_lambda(args) -> int:
    prob = _load(args)
    lam = structure_from_fourier(prob.pi, prob.spec)
    top = args.max if args.max is not None else max(lam.max_arity, 2)
    z = prob.spec.a_side.zero()
    rows = []
    for n in range(top + 1):
        g = lam.lambdas.get(n, z)
        print(f"lambda_{n}: {g}")
        rows.extend((n, prob.spec.a_side.format_monomial(m) or "1", str(c)) for m, c in sorted(g.terms.items()))
    out = _report_dir(args)
    if out:
        from . import report
        report.write_csv(out / "lambda.csv", ["order", "monomial", "coefficient"], rows)
        counts = [len(lam.lambdas.get(n, z).terms) for n in range(top + 1)]
        report.bar_plot(out / "lambda.png", [f"lambda_{n}" for n in range(top + 1)], counts,
                        title="terms per order", ylabel="terms")
    return 0


def cmd_coiso(args) -> int:
    prob = _load(args)
    lam = structure_from_fourier(prob.pi, prob.spec, n_max=1)
    z = prob.spec.a_side.zero()
    verdict = is_coisotropic(prob.pi, prob.spec)
    print(f"coisotropic: {'yes' if verdict else 'no'}")
    if not verdict:
        print(f"lambda_0: {lam.lambdas.get(0, z)}")
    print(f"lambda_1: {lam.lambdas.get(1, z)}")
    out = _report_dir(args)
    if out:
        from . import report
        report.write_csv(out / "coiso.csv", ["coisotropic", "lambda_0", "lambda_1"],
                         [(verdict, str(lam.lambdas.get(0, z)), str(lam.lambdas.get(1, z)))])
        report.bar_plot(out / "coiso.png", ["lambda_0", "lambda_1"],
                        [len(lam.lambdas.get(k, z).terms) for k in (0, 1)], title="terms", ylabel="terms")
    return 0


def _check_star(mu, coisotropic: bool, fn, max_arity: int) -> bool:
    ok = True
    gens = mu.ctx.gens()
    for n in range(max_arity + 1):
        for args in itertools.product(gens, repeat=n):
            res = a_infinity_residual(mu, list(args))
            if not residual_is_zero(res, fn):
                names = ",".join(map(str, args))
                print(f"check: associativity relation fails on ({names})")
                ok = False
    if mu.K >= 2:
        an = mu0_anomaly(mu, fn)
        if coisotropic and not an.first.is_zero():
            print(f"check: eps^1 curvature nonzero for a coisotropic submanifold: {an.first}")
            ok = False
        shown = an.F_value if an.F_value is not None else (an.F.exact_part() if an.F.is_exact() else an.F)
        print(f"check: anomaly F = {shown}")
        print(f"check: closure {'holds' if an.closed else 'FAILS'}")
        ok = ok and an.closed
    print(f"check: {'passed' if ok else 'FAILED'}")
    return ok


def cmd_star(args) -> int:
    prob = _load(args)
    fn = _weight_fn(args)
    try:
        mu = star_assemble(prob.pi, prob.spec, prob.order, max_arity=args.max_arity)
    except NotPoisson as e:
        raise SystemExit(f"error: {e}") from None
    print(format_series(mu, fn))
    out = _report_dir(args)
    if out:
        from . import report
        rows = []
        for k in range(mu.K + 1):
            for m in sorted(mu[k].arities()):
                val = evaluate_op(mu[k].component(m), fn)
                for key in sorted(val.values, key=repr):
                    v, e = val[key]
                    rows.append((k, m, val.formatter(key), v, e))
        report.write_csv(out / "star.csv", ["eps_power", "arity", "term", "value", "error"], rows)
        noisy = [r for r in rows if r[4] > 0]
        report.scatter_errors(out / "star.png", [r[3] for r in noisy], [r[4] for r in noisy],
                              title="numeric coefficients")
    if args.check:
        if not _check_star(mu, is_coisotropic(prob.pi, prob.spec), fn, args.check_arity):
            return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relform", description="Graph weights, P-infinity brackets and A-infinity "
                                "star products for coordinate submanifolds.")
    p.add_argument("--report", metavar="DIR", help="write CSV tables and PNG figures into DIR")
    # also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", metavar="DIR", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def weight_opts(q):
        q.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="quasi-random points per replicate")
        q.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
        q.add_argument("--seed", type=int, default=0)

    for name, fn, help_ in (("graphs", cmd_graphs, "list admissible graphs"),
                            ("weights", cmd_weights, "list graphs with their weights")):
        q = sub.add_parser(name, help=help_, parents=[common])
        q.add_argument("n", type=int, help="aerial vertices")
        q.add_argument("m", type=int, help="ground vertices")
        q.add_argument("degrees", type=_degrees, help="out-degrees p1,p2,...")
        q.add_argument("--canonical", action="store_true", help="one graph per unordered edge set")
        if name == "weights":
            weight_opts(q)
        q.set_defaults(func=fn)

    q = sub.add_parser("lambda", parents=[common], help="print the brackets lambda_0..lambda_N as multivectors")
    q.add_argument("file")
    q.add_argument("--max", type=int, default=None, help="highest order N to print")
    q.set_defaults(func=cmd_lambda)

    q = sub.add_parser("coiso", parents=[common], help="coisotropy verdict and lambda_1")
    q.add_argument("file")
    q.set_defaults(func=cmd_coiso)

    q = sub.add_parser("star", parents=[common], help="assemble the star product to the order in the file")
    q.add_argument("file")
    q.add_argument("--check", action="store_true", help="verify the associativity relations and the curvature")
    q.add_argument("--check-arity", type=int, default=3, help="largest number of generators fed to the check")
    q.add_argument("--max-arity", type=int, default=None, help="drop operator components above this arity")
    weight_opts(q)
    q.set_defaults(func=cmd_star)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
