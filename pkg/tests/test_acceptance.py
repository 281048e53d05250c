"""Acceptance checks, one test per numbered criterion.

Each test records a single ``criterion N: PASS|FAIL ...`` line; the lines are
printed at the end of the pytest run (see conftest.py) and also when this
file is executed directly.
"""
import math
import sys
import time
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ccembed import bench
from ccembed import centrality as cent
from ccembed import dissimilarity as dis
from ccembed.graph import Graph
from ccembed.lle import LleConfig, build_weight_matrix, kkt_residuals, solve_cclle, solve_weights
from ccembed.mds import (MdsConfig, block_surrogate, block_update, initial_positions,
                         solve_ccmds, stress)
from ccembed.pipeline import PipelineConfig, run_pipeline
from ccembed.render import edge_length_report
from oracles import (brute_betweenness_counts, brute_closeness, first_passage_times,
                     qp_dual_bisection, qp_objective, random_connected_adjacency)

RESULTS = {}


def report(k, ok, detail):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[k] = line
    print(line)
    assert ok, line


def connected_rgg(n, avg_degree, seed):
    """Random geometric graph on exactly ``n`` nodes, redrawn until connected."""
    radius = math.sqrt(avg_degree / (math.pi * n))
    s = seed
    while True:
        G = nx.random_geometric_graph(n, radius, seed=s)
        if nx.is_connected(G):
            return Graph.from_networkx(G)
        s += 1000


# 1 ---------------------------------------------------------------------------
def test_criterion_01_centrality_oracles():
    rng = np.random.default_rng(1)
    graphs = []
    for _ in range(200):
        n = int(rng.integers(2, 9))
        graphs.append(random_connected_adjacency(n, rng, float(rng.uniform(0.0, 0.7))))
    t0 = time.perf_counter()
    worst = 0.0
    for A in graphs:
        g = Graph.from_dense(A)
        counts, frac = brute_betweenness_counts(A)
        n = len(A)
        glob = counts / counts.sum() if counts.sum() else np.zeros(n)
        pairs = (n - 1) * (n - 2) / 2
        conv = frac / pairs if pairs else np.zeros(n)
        worst = max(worst,
                    np.abs(cent.betweenness(g).values - glob).max(),
                    np.abs(cent.betweenness(g, "conventional").values - conv).max(),
                    np.abs(cent.closeness(g).values - brute_closeness(A)).max())
    elapsed = time.perf_counter() - t0
    report(1, worst <= 1e-12 and elapsed < 10,
           f"200 graphs N<=8, max abs err {worst:.2e} (tol 1e-12), {elapsed:.2f}s incl. oracle (limit 10s)")


# 2 ---------------------------------------------------------------------------
def test_criterion_02_commute_times():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 21))
        A = random_connected_adjacency(n, rng, float(rng.uniform(0.0, 0.4)))
        M = first_passage_times(A)
        expect = M + M.T
        got = dis.commute_kernel(Graph.from_dense(A)).commute_times()
        off = ~np.eye(n, dtype=bool)
        worst = max(worst, np.max(np.abs(got[off] - expect[off]) / expect[off]))
    elapsed = time.perf_counter() - t0
    report(2, worst <= 1e-8 and elapsed < 30,
           f"50 graphs N<=20, max rel err {worst:.2e} (tol 1e-8), {elapsed:.2f}s (limit 30s)")


# 3 ---------------------------------------------------------------------------
def test_criterion_03_kernel_identity():
    rng = np.random.default_rng(3)
    worst = 0.0
    for k in range(20):
        n = int(rng.integers(10, 201))
        A = random_connected_adjacency(n, rng, float(rng.uniform(0.0, 6.0 / n)))
        g = Graph.from_dense(A)
        ck = dis.commute_kernel(g)
        H = dis.double_centered_kernel(dis.ectd_delta(g, ck))
        worst = max(worst, np.max(np.abs(H - ck.volume * ck.L_pinv)))
    report(3, worst <= 1e-8, f"20 graphs N<=200, max |H - Omega L+| = {worst:.2e} (tol 1e-8)")


# 4 ---------------------------------------------------------------------------
def test_criterion_04_kkt_closed_form():
    rng = np.random.default_rng(4)
    gap = res = 0.0
    n_active = 0
    for _ in range(100):
        K = int(rng.integers(1, 7))
        B = rng.standard_normal((K, K + int(rng.integers(0, 4))))
        H = B @ B.T + float(rng.uniform(1e-3, 1.0)) * np.eye(K)
        h = rng.standard_normal(K) * float(rng.uniform(0.1, 3.0))
        a = np.ones(K) @ np.linalg.solve(H, np.ones(K))
        f = float(rng.uniform(1.0005, 4.0)) / math.sqrt(a)
        sol = solve_weights(H, h, f)
        w_ref, _ = qp_dual_bisection(H, h, f)
        ref = qp_objective(w_ref, H, h)
        gap = max(gap, abs(qp_objective(sol.w, H, h) - ref) / max(1.0, abs(ref)))
        res = max(res, max(kkt_residuals(sol, H, h, f).values()))
        n_active += sol.active
    report(4, gap <= 1e-6 and res <= 1e-8,
           f"100 QPs K<=6 ({n_active} active), objective gap {gap:.2e} (tol 1e-6), "
           f"max KKT residual {res:.2e} (tol 1e-8)")


# 5 ---------------------------------------------------------------------------
def test_criterion_05_ccmds_descent_and_feasibility():
    rng = np.random.default_rng(5)
    worst_rise = worst_ball = worst_anchor = 0.0
    for inst in range(50):
        n = int(rng.integers(3, 41))
        A = random_connected_adjacency(n, rng, float(rng.uniform(0.02, 0.3)))
        g = Graph.from_dense(A)
        D = dis.ectd_delta(g).delta
        r = rng.uniform(0.0, 1.2, n) * D.max()
        for lam in (0.0, 1.0, 100.0):
            iterates = []
            _, trace = solve_ccmds(g, D, r, MdsConfig(lam=lam, seed=inst, max_outer_iters=25,
                                                      epsilon=1e-300),
                                   callback=lambda it, X: iterates.append(X.copy()))
            obj = np.concatenate([[trace.initial.objective], trace.column("objective")])
            rise = np.max((obj[1:] - obj[:-1]) / np.abs(obj[:-1]))
            worst_rise = max(worst_rise, rise)
            for X in iterates:
                worst_ball = max(worst_ball, np.max(np.linalg.norm(X, axis=1) - r))
            # walk one Gauss-Seidel sweep block by block at the last iterate
            X = iterates[-1].copy()
            for i in range(n):
                psi, phi = block_surrogate(X[i], X[i], i, X, D, A, lam)
                worst_anchor = max(worst_anchor, abs(psi - phi) / max(1.0, abs(psi)))
                X[i] = block_update(i, X, D, r, g, lam)
    ok = worst_rise <= 1e-9 and worst_ball <= 1e-12 and worst_anchor <= 1e-10
    report(5, ok, f"150 runs N<=40: max rel objective rise {worst_rise:.2e} (tol 1e-9), "
                  f"max ball violation {worst_ball:.2e} (tol 1e-12), "
                  f"max anchor gap {worst_anchor:.2e} (tol 1e-10)")


# 6 ---------------------------------------------------------------------------
RGG_DEGREE = 6  # near the connectivity threshold ln(300) ~ 5.7


def test_criterion_06_convergence_scale():
    t0 = time.perf_counter()
    iters = []
    for seed in range(5):
        g = connected_rgg(300, RGG_DEGREE, seed)
        radii = cent.radius_map(cent.betweenness(g), g).radii
        _, trace = solve_ccmds(g, dis.ectd_delta(g), radii,
                               MdsConfig(seed=seed, max_outer_iters=500, trace_stress=False))
        iters.append(len(trace) if trace.converged else None)
    elapsed = time.perf_counter() - t0
    hits = sum(k is not None for k in iters)
    report(6, hits >= 4 and elapsed < 300,
           f"N=300 RGG (mean degree {RGG_DEGREE}), converged {hits}/5 within 500 sweeps "
           f"(need 4), sweeps {iters}, {elapsed:.1f}s (limit 300s)")


# 7 ---------------------------------------------------------------------------
def test_criterion_07_lambda_trend():
    g = connected_rgg(150, 10, 42)
    radii = cent.radius_map(cent.betweenness(g), g).radii
    D = dis.ectd_delta(g)
    good = 0
    rows = []
    for seed in range(5):
        sm, ml = [], []
        for lam in (0.0, 1.0, 100.0, 10000.0):
            emb, _ = solve_ccmds(g, D, radii, MdsConfig(lam=lam, seed=seed, trace_stress=False))
            rep = edge_length_report(emb.X, g)
            sm.append(rep["smoothness"])
            ml.append(rep["mean_edge_length"])
        ok = all(b <= a for a, b in zip(sm, sm[1:])) and all(b <= a for a, b in zip(ml, ml[1:]))
        good += ok
        rows.append(f"{sm[0]:.0f}>{sm[-1]:.0f}" + ("" if ok else "(x)"))
    report(7, good >= 4, f"N={g.n}, lambda in {{0,1,100,1e4}}: trend holds for {good}/5 seeds (need 4); "
                         f"Tr(X'LX) {', '.join(rows)}")


# 8 ---------------------------------------------------------------------------
def test_criterion_08_lle_exactness():
    rng = np.random.default_rng(8)
    worst_norm = worst_sum = 0.0
    zero_branch = 0
    for k in range(10):
        n = int(rng.integers(5, 80))
        g = Graph.from_dense(random_connected_adjacency(n, rng, 3.0 / n))
        radii = cent.radius_map(cent.betweenness(g), g).radii
        cfg = LleConfig(seed=k, hops=1 + k % 2)
        emb, _, W = solve_cclle(g, radii, cfg, delta=dis.ectd_delta(g))
        X0 = initial_positions(radii, cfg.p, np.random.Generator(np.random.PCG64(k)), on_sphere=True)
        dev = np.abs(np.linalg.norm(emb.raw, axis=1) - radii)
        untouched = np.all(emb.raw == X0, axis=1)
        zero_branch += int(np.sum((dev > 1e-9) & untouched))
        worst_norm = max(worst_norm, np.max(np.where(untouched & (dev > 1e-9), 0.0, dev)))
        worst_sum = max(worst_sum, np.max(np.abs(np.asarray(W.W.sum(axis=1)).ravel() - 1)))
    report(8, worst_norm <= 1e-9 and worst_sum <= 1e-9,
           f"10 graphs: max | ||x_i|| - f_i | = {worst_norm:.2e}, max |row sum - 1| = {worst_sum:.2e} "
           f"(tol 1e-9), zero-v rows {zero_branch}")


# 9 ---------------------------------------------------------------------------
def _lle_per_sweep(g, sweeps=100):
    radii = cent.radius_map(cent.degree_centrality(g), g).radii
    W = build_weight_matrix(g, dis.double_centered_kernel(dis.shortest_path_delta(g)), radii)
    cfg = LleConfig(max_outer_iters=sweeps, epsilon=1e-300, trace_stress=False)
    best = math.inf
    for _ in range(3):
        t0 = time.perf_counter()
        solve_cclle(g, radii, cfg, weights=W)
        best = min(best, (time.perf_counter() - t0) / sweeps)
    return best


@pytest.mark.slow
def test_criterion_09_lle_scaling():
    small = connected_rgg(1000, 10, 0)
    large = connected_rgg(2000, 10, 0)
    ratio = _lle_per_sweep(large) / _lle_per_sweep(small)

    g = bench.random_geometric(5000, 10, 0)
    radii = cent.radius_map(cent.degree_centrality(g), g).radii
    D = dis.shortest_path_delta(g)
    stop = {"max_outer_iters": 200, "trace_stress": False}
    t0 = time.perf_counter()
    _, lt, _ = solve_cclle(g, radii, LleConfig(**stop), delta=D)
    t_lle = time.perf_counter() - t0
    t0 = time.perf_counter()
    _, mt = solve_ccmds(g, D, radii, MdsConfig(**stop))
    t_mds = time.perf_counter() - t0
    report(9, ratio <= 3 and t_lle < t_mds,
           f"per-sweep ratio N=2000/N=1000 {ratio:.2f} (limit 3); N={g.n}: CC-LLE {t_lle:.1f}s "
           f"({len(lt)} sweeps, incl. kernel+weights) vs CC-MDS {t_mds:.1f}s ({len(mt)} sweeps)")


# 10 --------------------------------------------------------------------------
def test_criterion_10_determinism(tmp_path):
    edges = tmp_path / "g.txt"
    g = connected_rgg(80, 6, 10)
    edges.write_text("".join(f"n{i} n{j}\n" for i, j in g.edges()))
    same = []
    for algo in ("ccmds", "cclle"):
        blobs = []
        for run in ("a", "b"):
            cfg = PipelineConfig(input=str(edges), algorithm=algo, seed=13, max_iters=100,
                                 output_dir=str(tmp_path / f"{algo}-{run}"))
            run_pipeline(cfg)
            blobs.append((tmp_path / f"{algo}-{run}" / "embedding.csv").read_bytes())
        same.append(blobs[0] == blobs[1])
    report(10, all(same), f"byte-identical embedding.csv across two runs: ccmds={same[0]}, cclle={same[1]}")


# 11 --------------------------------------------------------------------------
def test_criterion_11_plant_and_recover():
    rng = np.random.default_rng(11)
    worst = 0.0
    for k in range(20):
        n = int(rng.integers(10, 60))
        Y = rng.uniform(-1.0, 1.0, (n, 2)) * float(rng.uniform(0.5, 5.0))
        Y -= Y.mean(axis=0)
        D = np.linalg.norm(Y[:, None] - Y[None], axis=2)
        emb, _ = solve_ccmds(None, D, np.linalg.norm(Y, axis=1), MdsConfig(seed=k))
        # stress sums each unordered pair once, so compare to the same sum of delta^2
        worst = max(worst, stress(emb.X, D) / (0.5 * np.sum(D * D)))
    report(11, worst <= 0.05, f"20 planted sets, max relative stress {worst:.2e} (limit 0.05)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
