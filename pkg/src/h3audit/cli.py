"""``h3`` command-line front end.

Exit status: 0 on success, 1 when a checked property is VIOLATED, 2 on usage
or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import harness
from . import pseudorandom as pr
from .errors import H3Error
from .generators import KINDS, GenSpec, generate, sidecar
from .hypergraph import VertexSet, read_h3, write_h3
from .patterns import classify, count_embeddings

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE = 0, 1, 2


def _seed(args) -> int:
    env = os.environ.get("H3_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise H3Error("CONFIG_INVALID", f"H3_SEED={env!r} is not an integer") from None
    return args.seed


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise H3Error("IO_ERROR", f"cannot write {out}: {exc.strerror}") from exc
    else:
        sys.stdout.write(text)


def _vertex_list(text: str | None, n: int) -> VertexSet:
    if text is None:
        return VertexSet.full(n)
    try:
        return VertexSet.of(n, [int(t) for t in text.split(",") if t.strip()])
    except ValueError:
        raise H3Error("CONFIG_INVALID", f"bad vertex list {text!r}") from None


def cmd_gen(args) -> int:
    kind = args.kind.upper()
    if kind not in KINDS:
        raise H3Error("CONFIG_INVALID", f"--kind must be one of {', '.join(KINDS)}")
    if args.n is None:
        raise H3Error("CONFIG_INVALID", "--n is required")
    spec = GenSpec(kind, args.n, args.p or 0.0, _seed(args), args.s, args.p_in, args.keep)
    host = read_h3(args.host) if args.host else None
    G = generate(spec, host)
    if args.out:
        write_h3(G, args.out)
        _emit(sidecar(spec, G), args.out + ".json")
    else:
        sys.stdout.write(G.dumps())
    return EXIT_OK


def cmd_check(args) -> int:
    if not args.input:
        raise H3Error("CONFIG_INVALID", "--in is required")
    G = read_h3(args.input)
    prop = args.property.upper()
    seed = _seed(args)
    q = args.q if args.q is not None else (G.density if G.m else None)
    if prop == "TUPLE":
        if q is None:
            raise H3Error("NONPOSITIVE_Q", "--q is required for an empty hypergraph")
        rep = pr.check_tuple(G, args.delta, q)
    elif prop == "JUMBLED":
        p = args.p if args.p is not None else G.density
        if args.beta is None:
            est = pr.estimate_jumbledness(G, p, args.restarts, seed)
            _emit(json.dumps(est.to_dict()) + "\n", args.out)
            return EXIT_OK
        rep = pr.check_jumbled(G, p, args.beta, args.restarts, seed)
    else:
        p = args.p if args.p is not None else q
        params = pr.PropertyParams(q=q, p=p, eta=args.eta, delta=args.delta, eps=args.eps, C=args.C, k=args.k)
        if prop == "QPRIME":
            rep = pr.check_qprime(G, params, args.mode, args.restarts, seed)
        elif prop == "DISC":
            rep = pr.check_disc(G, _vertex_list(args.X, G.n), _vertex_list(args.Y, G.n), params,
                                args.mode, args.restarts, seed)
        elif prop == "PAIR":
            rep = pr.check_pair(G, _vertex_list(args.X, G.n), _vertex_list(args.Y, G.n), params)
        else:
            rep = pr.check_bdd(G, params, args.mode, args.budget, args.restarts, seed)
    _emit(rep.to_json() + "\n", args.out)
    return EXIT_VIOLATED if rep.violated else EXIT_OK


def cmd_count(args) -> int:
    if not args.host or not args.pattern:
        raise H3Error("CONFIG_INVALID", "--host and --pattern are required")
    G = read_h3(args.host)
    H = harness.resolve_pattern(args.pattern)
    ec = count_embeddings(G, H, args.q, threads=args.threads)
    if args.format == "csv":
        line = f"{ec.count},{ec.expected!r},{ec.relative_error!r}\n"
    else:
        line = json.dumps({"count": ec.count, "expected": ec.expected, "relative_error": ec.relative_error}) + "\n"
    _emit(line, args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    if not args.pattern:
        raise H3Error("CONFIG_INVALID", "--pattern is required")
    H = harness.resolve_pattern(args.pattern)
    _emit(json.dumps(classify(H)) + "\n", args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    if not args.config:
        raise H3Error("CONFIG_INVALID", "--config is required")
    cfg = harness.ExperimentConfig.load(args.config)
    if args.threads is not None:
        cfg.threads = args.threads
    if args.format is not None:
        cfg.format = args.format
    out = args.out or cfg.out
    cfg.out = None
    rows = harness.run_experiment(cfg)
    text = harness.rows_to_csv(rows) if cfg.format == "csv" else harness.rows_to_json(rows)
    _emit(text, out)
    return EXIT_OK


def cmd_implication(args) -> int:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise H3Error("IO_ERROR", f"cannot read {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise H3Error("CONFIG_INVALID", f"{args.config}: {exc}") from exc
        cfg = harness.ImplicationConfig.from_dict(raw)
    else:
        if args.n is None or args.p is None:
            raise H3Error("CONFIG_INVALID", "give --config, or --n and --p")
        seed = _seed(args)
        cfg = harness.ImplicationConfig.random_grid(args.n, [args.p], range(seed, seed + args.seeds),
                                                    restarts=args.restarts)
    if args.threads is not None:
        cfg.threads = args.threads
    report = harness.implication_suite(cfg)
    _emit(harness.implication_json(report), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="h3", description="3-uniform hypergraph pseudorandomness and counting audits")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, threads_default=1):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=threads_default)
        p.add_argument("--out")

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--kind", default="RANDOM")
    g.add_argument("--n", type=int)
    g.add_argument("--p", type=float)
    g.add_argument("--s", type=int, default=0)
    g.add_argument("--p-in", dest="p_in", type=float, default=0.0)
    g.add_argument("--keep", type=float, default=1.0)
    g.add_argument("--host")
    common(g)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", help="check one property")
    c.add_argument("property", choices=["qprime", "disc", "pair", "tuple", "bdd", "jumbled"], type=str.lower)
    c.add_argument("--in", dest="input")
    c.add_argument("--q", type=float)
    c.add_argument("--p", type=float)
    c.add_argument("--eta", type=float, default=0.5)
    c.add_argument("--delta", type=float, default=0.1)
    c.add_argument("--eps", type=float, default=0.1)
    c.add_argument("--C", type=float, default=2.0)
    c.add_argument("--k", type=int, default=2)
    c.add_argument("--beta", type=float)
    c.add_argument("--X", help="comma-separated vertex list (default: all)")
    c.add_argument("--Y", help="comma-separated vertex list (default: all)")
    c.add_argument("--mode", choices=["exact", "search", "spectral"], type=str.lower)
    c.add_argument("--restarts", type=int, default=8)
    c.add_argument("--budget", type=int, default=pr.BDD_DEFAULT_BUDGET)
    common(c)
    c.set_defaults(func=cmd_check)

    n = sub.add_parser("count", help="count embeddings of a pattern")
    n.add_argument("--host")
    n.add_argument("--pattern")
    n.add_argument("--q", type=float)
    n.add_argument("--format", choices=["csv", "json"], default="json")
    common(n)
    n.set_defaults(func=cmd_count)

    k = sub.add_parser("classify", help="classify a pattern")
    k.add_argument("--pattern")
    k.add_argument("--out")
    k.set_defaults(func=cmd_classify)

    e = sub.add_parser("experiment", help="run an experiment config")
    e.add_argument("--config")
    e.add_argument("--format", choices=["csv", "json"])
    e.add_argument("--threads", type=int)
    e.add_argument("--out")
    e.set_defaults(func=cmd_experiment)

    i = sub.add_parser("implication", help="run the implication chain")
    i.add_argument("--config")
    i.add_argument("--n", type=int)
    i.add_argument("--p", type=float)
    i.add_argument("--seeds", type=int, default=10, help="number of consecutive seeds")
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--restarts", type=int, default=8)
    i.add_argument("--threads", type=int)
    i.add_argument("--out")
    i.set_defaults(func=cmd_implication)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except H3Error as exc:
        print(f"h3: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
