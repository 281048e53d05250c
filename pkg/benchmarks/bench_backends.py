"""Compare the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_backends.py [--sizes 300,1000] [--sweeps 5]

Prints one CSV row per (graph, backend, kernel) with seconds per call and
the speed-up of the compiled backend over the fallback.
"""
import argparse
import csv
import sys

from ccembed import bench, kernels


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="300,1000", type=lambda s: [int(x) for x in s.split(",")])
    ap.add_argument("--avg-degree", type=float, default=8.0)
    ap.add_argument("--sweeps", type=int, default=5)
    args = ap.parse_args(argv)

    if "cython" not in kernels.available():
        print("compiled kernels are not built; only the fallback is available", file=sys.stderr)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["n", "edges", "kernel", "backend", "seconds", "speedup_vs_python"])
    for n in args.sizes:
        g = bench.random_geometric(n, args.avg_degree, seed=0)
        rows = bench.backend_report(g, sweeps=args.sweeps)
        base = {(r.algorithm, r.stage): r.seconds for r in rows if r.graph == "backend=python"}
        for r in rows:
            key = (r.algorithm, r.stage)
            label = "betweenness" if r.stage == "betweenness" else f"{r.algorithm}_sweep"
            out.writerow([r.n, r.edges, label, r.graph.split("=")[1], f"{r.seconds:.6f}",
                          f"{base[key] / r.seconds:.1f}" if r.seconds > 0 else ""])
    return 0


if __name__ == "__main__":
    sys.exit(main())
