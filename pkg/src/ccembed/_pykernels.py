"""Pure-Python (numpy) versions of the compiled kernels.

Used when the Cython extension is not built, or when
``CCEMBED_BACKEND=python`` is set. Results agree with the compiled path to
rounding; only reduction order differs.
"""
from collections import deque

import numpy as np

TIE_EPS = 1e-15


def ccmds_sweep(X, delta, radii, indptr, indices, lam, s, order):
    n = X.shape[0]
    for i in order:
        r = radii[i]
        if r <= 0.0:
            X[i] = 0.0
            continue
        diff = X[i] - X
        nrm = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        nrm[i] = np.inf
        tie = nrm <= TIE_EPS
        scale = np.divide(delta[i], nrm, out=np.zeros(n), where=~tie)
        acc = X.sum(axis=0) - X[i] + scale @ diff
        if tie.any():
            acc += delta[i][tie].sum() * s
        nbrs = indices[indptr[i]:indptr[i + 1]]
        denom = n - 1.0
        if lam != 0.0:
            acc += lam * X[nbrs].sum(axis=0)
            denom += lam * len(nbrs)
        acc /= denom
        a = np.sqrt(acc @ acc)
        X[i] = acc * (r / a) if a > r else acc


def cclle_sweep(X, indptr, indices, data, radii, order):
    for i in order:
        lo, hi = indptr[i], indptr[i + 1]
        v = data[lo:hi] @ X[indices[lo:hi]]
        nv = np.sqrt(v @ v)
        if nv > 0.0:
            X[i] = radii[i] * v / nv


def brandes(indptr, indices, n):
    counts = np.zeros(n)
    frac = np.zeros(n)
    adj = [indices[indptr[v]:indptr[v + 1]].tolist() for v in range(n)]
    for src in range(n):
        dist = [-1] * n
        sigma = [0.0] * n
        dist[src] = 0
        sigma[src] = 1.0
        order = []
        queue = deque([src])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        tau = [0.0] * n
        dep = [0.0] * n
        for v in reversed(order):
            for w in adj[v]:
                if dist[w] == dist[v] + 1:
                    tau[v] += 1.0 + tau[w]
                    dep[v] += sigma[v] / sigma[w] * (1.0 + dep[w])
            if v != src:
                counts[v] += sigma[v] * tau[v]
                frac[v] += dep[v]
    return counts * 0.5, frac * 0.5
