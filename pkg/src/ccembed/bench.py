"""Wall-clock timing of the embedding stages on one or more graphs."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import networkx as nx
import numpy as np

from ccembed import centrality as cent
from ccembed import dissimilarity as dis
from ccembed import kernels
from ccembed.errors import ConfigError
from ccembed.graph import Graph
from ccembed.lle import LleConfig, build_weight_matrix, solve_cclle
from ccembed.mds import MdsConfig, solve_ccmds


@dataclass
class TimingRow:
    graph: str
    n: int
    edges: int
    algorithm: str
    stage: str
    seconds: float
    sweeps: int = 0


def random_geometric(n: int, avg_degree: float, seed: int = 0) -> Graph:
    """Largest component of a unit-square random geometric graph whose
    expected degree is ``avg_degree``."""
    radius = math.sqrt(avg_degree / (math.pi * n))
    G = nx.random_geometric_graph(n, radius, seed=seed)
    G = G.subgraph(max(nx.connected_components(G), key=len))
    return Graph.from_networkx(nx.convert_node_labels_to_integers(G))


def sparse_random(n: int, avg_degree: float, seed: int = 0) -> Graph:
    """Largest component of a G(n, p) graph with expected degree ``avg_degree``."""
    G = nx.fast_gnp_random_graph(n, avg_degree / (n - 1), seed=seed)
    G = G.subgraph(max(nx.connected_components(G), key=len))
    return Graph.from_networkx(nx.convert_node_labels_to_integers(G))


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


def runtime_report(graphs, algorithms=("cclle", "ccmds"), metric: str = "shortest_path",
                   measure: str = "degree", max_iters: int = 20, epsilon: float | None = None,
                   seed: int = 0, backend: str | None = None) -> list[TimingRow]:
    """Per-stage wall-clock times for each ``(name, Graph)`` in ``graphs``.

    Both solvers use the same stopping rule (``epsilon``/``max_iters``);
    stress telemetry is switched off so only solver work is timed.
    """
    graphs = list(graphs)
    if len(graphs) < 2:
        raise ConfigError("runtime_report needs at least two graphs")
    rows: list[TimingRow] = []
    for name, g in graphs:
        c, t = _timed(cent.compute, g, measure)
        rows.append(TimingRow(name, g.n, g.n_edges, "-", "centrality", t))
        radii = cent.radius_map(c, g).radii
        dm, t = _timed(dis.compute, g, metric)
        rows.append(TimingRow(name, g.n, g.n_edges, "-", "dissimilarity", t))
        if "cclle" in algorithms:
            H, t_h = _timed(dis.double_centered_kernel, dm)
            W, t_w = _timed(build_weight_matrix, g, H, radii)
            rows.append(TimingRow(name, g.n, g.n_edges, "cclle", "kernel", t_h))
            rows.append(TimingRow(name, g.n, g.n_edges, "cclle", "weights", t_w))
            cfg = LleConfig(max_outer_iters=max_iters, epsilon=epsilon, seed=seed, trace_stress=False)
            (emb, trace, _), t_s = _timed(solve_cclle, g, radii, cfg, weights=W, backend=backend)
            k = max(len(trace), 1)
            rows.append(TimingRow(name, g.n, g.n_edges, "cclle", "bcd_total", t_s, len(trace)))
            rows.append(TimingRow(name, g.n, g.n_edges, "cclle", "per_sweep", t_s / k, len(trace)))
        if "ccmds" in algorithms:
            cfg = MdsConfig(max_outer_iters=max_iters, epsilon=epsilon, seed=seed, trace_stress=False)
            (emb, trace), t_s = _timed(solve_ccmds, g, dm, radii, cfg, backend=backend)
            k = max(len(trace), 1)
            rows.append(TimingRow(name, g.n, g.n_edges, "ccmds", "bcd_total", t_s, len(trace)))
            rows.append(TimingRow(name, g.n, g.n_edges, "ccmds", "per_sweep", t_s / k, len(trace)))
    return rows


def backend_report(g: Graph, sweeps: int = 5, seed: int = 0) -> list[TimingRow]:
    """Per-sweep time of each available kernel backend on the same problem."""
    radii = cent.radius_map(cent.degree_centrality(g), g).radii
    dm = dis.shortest_path_delta(g)
    W = build_weight_matrix(g, dis.double_centered_kernel(dm), radii)
    rows = []
    for name in kernels.available():
        cfg = MdsConfig(max_outer_iters=sweeps, epsilon=1e-300, seed=seed, trace_stress=False)
        _, t = _timed(solve_ccmds, None, dm, radii, cfg, backend=name)
        rows.append(TimingRow(f"backend={name}", g.n, g.n_edges, "ccmds", "per_sweep", t / sweeps, sweeps))
        lcfg = LleConfig(max_outer_iters=sweeps, epsilon=1e-300, seed=seed, trace_stress=False)
        _, t = _timed(solve_cclle, g, radii, lcfg, weights=W, backend=name)
        rows.append(TimingRow(f"backend={name}", g.n, g.n_edges, "cclle", "per_sweep", t / sweeps, sweeps))
        _, t = _timed(cent.betweenness, g, backend=name)
        rows.append(TimingRow(f"backend={name}", g.n, g.n_edges, "-", "betweenness", t))
    return rows


def write_report(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["graph", "n", "edges", "algorithm", "stage", "seconds", "sweeps"])
    for r in rows:
        w.writerow([r.graph, r.n, r.edges, r.algorithm, r.stage, f"{r.seconds:.6f}", r.sweeps])


def per_sweep(rows, algorithm: str) -> np.ndarray:
    return np.array([r.seconds for r in rows if r.algorithm == algorithm and r.stage == "per_sweep"])
