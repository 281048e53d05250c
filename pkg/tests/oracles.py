"""Independent reference computations used only by the tests.

Nothing here calls into ccembed's numerical paths.
"""
import itertools
import math

import numpy as np


def random_connected_adjacency(n, rng, p_extra=0.3):
    """Random spanning tree plus independent extra edges."""
    A = np.zeros((n, n), dtype=int)
    perm = rng.permutation(n)
    for k in range(1, n):
        a, b = perm[k], perm[rng.integers(0, k)]
        A[a, b] = A[b, a] = 1
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p_extra:
                A[i, j] = A[j, i] = 1
    return A


def simple_paths(A, s, t):
    """All simple paths from s to t by exhaustive DFS."""
    n = len(A)
    out = []
    stack = [(s, [s])]
    while stack:
        v, path = stack.pop()
        if v == t:
            out.append(path)
            continue
        for w in range(n):
            if A[v][w] and w not in path:
                stack.append((w, path + [w]))
    return out


def brute_geodesics(A):
    n = len(A)
    D = np.full((n, n), np.inf)
    for s in range(n):
        D[s, s] = 0
        for t in range(n):
            if s != t:
                paths = simple_paths(A, s, t)
                if paths:
                    D[s, t] = min(len(p) - 1 for p in paths)
    return D


def brute_shortest_paths(A):
    """{(s, t): [shortest paths]} for unordered pairs s < t."""
    n = len(A)
    out = {}
    for s, t in itertools.combinations(range(n), 2):
        paths = simple_paths(A, s, t)
        if not paths:
            continue
        m = min(len(p) for p in paths)
        out[(s, t)] = [p for p in paths if len(p) == m]
    return out


def brute_betweenness_counts(A):
    """Shortest paths through each node as an interior vertex, per node."""
    counts = np.zeros(len(A))
    frac = np.zeros(len(A))
    for paths in brute_shortest_paths(A).values():
        for p in paths:
            for v in p[1:-1]:
                counts[v] += 1
                frac[v] += 1.0 / len(paths)
    return counts, frac


def brute_closeness(A):
    D = brute_geodesics(A)
    return 1.0 / D.sum(axis=1)


def first_passage_times(A):
    """m[i, j]: expected hops for a walk from i to first reach j.

    Solves m(j|i) = 1 + sum_k p_ik m(j|k), m(j|j) = 0 per target j.
    """
    A = np.asarray(A, dtype=float)
    n = len(A)
    P = A / A.sum(axis=1, keepdims=True)
    M = np.zeros((n, n))
    for j in range(n):
        keep = [k for k in range(n) if k != j]
        Q = P[np.ix_(keep, keep)]
        m = np.linalg.solve(np.eye(n - 1) - Q, np.ones(n - 1))
        M[keep, j] = m
    return M


def qp_dual_bisection(H, h, f, tol=1e-14):
    """Solve min w'Hw - 2h'w s.t. 1'w = 1, w'Hw <= f^2.

    For a multiplier g >= 0 the equality-constrained minimiser of
    (1+g) w'Hw - 2h'w comes from the bordered KKT system; its energy is
    non-increasing in g, so bisection on g finds the active multiplier.
    """
    K = len(h)

    def w_of(g):
        M = np.zeros((K + 1, K + 1))
        M[:K, :K] = 2 * (1 + g) * H
        M[:K, K] = 1
        M[K, :K] = 1
        rhs = np.concatenate([2 * h, [1.0]])
        return np.linalg.solve(M, rhs)[:K]

    def energy(g):
        w = w_of(g)
        return w @ H @ w

    if energy(0.0) <= f * f:
        return w_of(0.0), 0.0
    lo, hi = 0.0, 1.0
    while energy(hi) > f * f:
        hi *= 2
        if hi > 1e300:
            raise ValueError("infeasible")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if energy(mid) > f * f:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return w_of(hi), hi


def qp_objective(w, H, h):
    return float(w @ H @ w - 2 * h @ w)


def naive_stress(X, D):
    n = len(X)
    total = 0.0
    for i in range(n):
        for j in range(n):
            d = math.sqrt(sum((X[i][k] - X[j][k]) ** 2 for k in range(len(X[i]))))
            total += (d - D[i][j]) ** 2
    return 0.5 * total


def surrogate_argmin_grid(c_lin, q, radius, n_grid=401):
    """argmin of q/2 ||x||^2 - c_lin'x over the disc ||x|| <= radius (2-D),
    by dense polar grid then local refinement."""
    best = (np.inf, None)
    for rr in np.linspace(0, radius, n_grid):
        for th in np.linspace(0, 2 * np.pi, n_grid, endpoint=False):
            x = np.array([rr * np.cos(th), rr * np.sin(th)])
            val = 0.5 * q * x @ x - c_lin @ x
            if val < best[0]:
                best = (val, x)
    x = best[1]
    step = radius / n_grid
    for _ in range(60):
        improved = False
        for dx in ((step, 0), (-step, 0), (0, step), (0, -step)):
            y = x + np.array(dx)
            if np.linalg.norm(y) > radius:
                y = y * radius / np.linalg.norm(y)
            v = 0.5 * q * y @ y - c_lin @ y
            if v < best[0] - 1e-18:
                best = (v, y)
                x = y
                improved = True
        if not improved:
            step /= 2
    return best[1]
