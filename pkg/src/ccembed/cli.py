"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from ccembed import bench
from ccembed import centrality as cent
from ccembed import dissimilarity as dis
from ccembed.errors import CCEmbedError, ConfigError
from ccembed.graph import read_edge_list
from ccembed.pipeline import (PipelineConfig, default_threads, load_config_file, read_embedding,
                              run_pipeline, write_centralities, write_histogram)
from ccembed.render import SvgLayout, edge_length_report, render_svg

log = logging.getLogger("ccembed")

# flag name -> config key; only flags the user actually passed override
_EMBED_FLAGS = {
    "centrality": "centrality",
    "normalization": "betweenness_normalization",
    "radius_transform": "radius_transform",
    "alpha": "alpha",
    "beta": "beta",
    "radius_floor": "radius_floor",
    "metric": "dissimilarity",
    "kernel": "kernel",
    "lam": "lam",
    "epsilon": "epsilon",
    "sigma": "sigma",
    "hops": "hops",
    "p": "p",
    "seed": "seed",
    "max_iters": "max_iters",
    "sweep_order": "sweep_order",
    "out_dir": "output_dir",
    "edges": "draw_edges",
    "write_delta": "write_delta",
    "strict": "strict_edges",
    "threads": "threads",
}


def _read_graph(path, strict=False):
    try:
        return read_edge_list(path, strict=strict)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def cmd_centrality(args):
    g = _read_graph(args.input)
    kwargs = {"normalization": args.normalization} if args.measure == "betweenness" else {}
    c = cent.compute(g, args.measure, **kwargs)
    write_centralities(args.out, g, c.values)
    if args.histogram:
        edges, counts = cent.centrality_histogram(c, args.bins)
        write_histogram(args.histogram, edges, counts)
    return 0


def cmd_delta(args):
    g = _read_graph(args.input)
    dm = dis.compute(g, args.metric)
    with open(args.out, "w", newline="") as fh:
        dis.write_delta_csv(dm, g.node_ids, fh)
    return 0


def _embed(args, algorithm):
    mapping = {}
    if args.from_manifest:
        mapping.update(load_config_file(args.from_manifest))
    if args.config:
        mapping.update(load_config_file(args.config))
    mapping["algorithm"] = algorithm
    if args.input:
        mapping["input"] = args.input
    mapping.setdefault("threads", default_threads())
    for flag, key in _EMBED_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            mapping[key] = value
    cfg = PipelineConfig.from_mapping(mapping)
    manifest = run_pipeline(cfg, backend=args.backend)
    print(json.dumps({"output_dir": cfg.output_dir, "iterations": manifest["iterations"],
                      "converged": manifest["converged"], "files": sorted(manifest["files"])}))
    return 0


def cmd_render(args):
    g = _read_graph(args.input)
    ids, X = read_embedding(args.embedding)
    order = [g.index_of(t) for t in ids]
    if sorted(order) != list(range(g.n)):
        raise ConfigError("embedding rows do not cover the graph's nodes")
    Xg = np.empty_like(X)
    Xg[order] = X
    kwargs = {"normalization": args.normalization} if args.measure == "betweenness" else {}
    c = cent.compute(g, args.measure, **kwargs)
    svg = render_svg(Xg, g, c, SvgLayout(width=args.size, height=args.size,
                                         node_radius=args.node_radius, draw_edges=args.edges))
    with open(args.out, "w") as fh:
        fh.write(svg)
    if args.report:
        print(json.dumps(edge_length_report(Xg, g)))
    return 0


def cmd_bench(args):
    if args.sizes:
        gen = bench.random_geometric if args.family == "geometric" else bench.sparse_random
        graphs = [(f"{args.family}-{n}", gen(n, args.avg_degree, args.seed))
                  for n in args.sizes]
    else:
        graphs = [(path, _read_graph(path)) for path in args.inputs]
    if args.backends:
        rows = []
        for name, g in graphs:
            rows.extend(bench.backend_report(g, sweeps=args.max_iters))
    else:
        algos = ("cclle", "ccmds") if args.algorithm == "both" else (args.algorithm,)
        rows = bench.runtime_report(graphs, algos, metric=args.metric, measure=args.measure,
                                    max_iters=args.max_iters, epsilon=args.epsilon, seed=args.seed)
    if args.out == "-":
        bench.write_report(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            bench.write_report(rows, fh)
    return 0


def _bool_flag(parser, name, dest, help):
    parser.add_argument(f"--{name}", dest=dest, action="store_true", default=None, help=help)
    parser.add_argument(f"--no-{name}", dest=dest, action="store_false")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ccembed", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("centrality", help="write node centralities (and a histogram)")
    p.add_argument("input")
    p.add_argument("--measure", choices=cent.MEASURES, default="betweenness")
    p.add_argument("--normalization", choices=("global", "conventional"), default="global")
    p.add_argument("--out", default="centralities.csv")
    p.add_argument("--histogram", metavar="CSV")
    p.add_argument("--bins", type=int, default=50)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("delta", help="write the dense dissimilarity matrix as CSV")
    p.add_argument("input")
    p.add_argument("--metric", choices=dis.METRICS, default="ectd")
    p.add_argument("--out", default="delta.csv")
    p.set_defaults(func=cmd_delta)

    for name, algo in (("embed-mds", "ccmds"), ("embed-lle", "cclle")):
        p = sub.add_parser(name, help=f"run the {algo} pipeline")
        p.add_argument("input", nargs="?")
        p.add_argument("--config", help="flat YAML/JSON key-value file")
        p.add_argument("--from-manifest", help="rerun the config recorded in a manifest.json")
        p.add_argument("--centrality", choices=cent.MEASURES)
        p.add_argument("--normalization", choices=("global", "conventional"))
        p.add_argument("--radius-transform", choices=cent.TRANSFORMS)
        p.add_argument("--alpha", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--radius-floor", type=float)
        p.add_argument("--metric", choices=dis.METRICS)
        p.add_argument("--epsilon", type=float, help="absolute Frobenius tolerance (default scale-aware)")
        p.add_argument("--p", type=int, choices=(2, 3))
        p.add_argument("--seed", type=int)
        p.add_argument("--max-iters", type=int)
        p.add_argument("--out-dir")
        p.add_argument("--threads", type=int)
        p.add_argument("--backend", choices=("cython", "python"))
        _bool_flag(p, "edges", "edges", "draw edges in the SVG (default: only if N <= 1000)")
        _bool_flag(p, "write-delta", "write_delta", "also write the dense delta.csv")
        _bool_flag(p, "strict", "strict", "reject reversed duplicate edges")
        if algo == "ccmds":
            p.add_argument("--lam", type=float, help="smoothness weight")
            p.add_argument("--sweep-order", choices=("ascending", "random"))
        else:
            p.add_argument("--hops", type=int)
            p.add_argument("--sigma", type=float, help="ridge added to each H_i")
            p.add_argument("--kernel", choices=("delta", "laplacian_pinv"))
        p.set_defaults(func=lambda a, algo=algo: _embed(a, algo))

    p = sub.add_parser("render", help="draw an embedding CSV as SVG")
    p.add_argument("input")
    p.add_argument("--embedding", required=True)
    p.add_argument("--measure", choices=cent.MEASURES, default="betweenness")
    p.add_argument("--normalization", choices=("global", "conventional"), default="global")
    p.add_argument("--out", default="layout.svg")
    p.add_argument("--size", type=float, default=800.0)
    p.add_argument("--node-radius", type=float, default=3.0)
    p.add_argument("--report", action="store_true", help="print edge-length summary as JSON")
    _bool_flag(p, "edges", "edges", "draw edges (default: only if N <= 1000)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("bench", help="time the pipeline stages")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--sizes", type=lambda s: [int(x) for x in s.split(",")],
                   help="synthetic graph sizes, e.g. 1000,2000")
    p.add_argument("--family", choices=("geometric", "gnp"), default="geometric")
    p.add_argument("--avg-degree", type=float, default=8.0)
    p.add_argument("--algorithm", choices=("cclle", "ccmds", "both"), default="both")
    p.add_argument("--metric", choices=dis.METRICS, default="shortest_path")
    p.add_argument("--measure", choices=cent.MEASURES, default="degree")
    p.add_argument("--max-iters", type=int, default=20)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backends", action="store_true", help="compare compiled and fallback kernels")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "bench" and not args.sizes and len(args.inputs) < 2 and not args.backends:
        parser.error("bench needs at least two inputs or --sizes")
    try:
        return args.func(args)
    except CCEmbedError as exc:
        print(f"ccembed: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
