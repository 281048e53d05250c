# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: Gauss-Seidel sweeps and Brandes accumulation.

Signatures mirror :mod:`ccembed._pykernels` exactly; the selector in
:mod:`ccembed.kernels` picks one of the two at import time.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef cnp.float64_t f64
ctypedef cnp.int64_t i64

# Subgradient tie threshold on ||x - x_j||.
cdef double TIE_EPS = 1e-15


def ccmds_sweep(double[:, ::1] X, const double[:, ::1] delta,
                const double[::1] radii, const i64[::1] indptr,
                const i64[::1] indices, double lam, const double[::1] s,
                const i64[::1] order):
    """One Gauss-Seidel sweep of the majorized CC-MDS block updates, in place."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t p = X.shape[1]
    cdef Py_ssize_t k, t, j, d, i
    cdef double nrm, dij, denom, scale, r
    cdef double[::1] anchor = np.empty(p, dtype=np.float64)
    cdef double[::1] acc = np.empty(p, dtype=np.float64)
    cdef double[::1] diff = np.empty(p, dtype=np.float64)

    for k in range(order.shape[0]):
        i = order[k]
        r = radii[i]
        if r <= 0.0:
            for d in range(p):
                X[i, d] = 0.0
            continue
        for d in range(p):
            anchor[d] = X[i, d]
            acc[d] = 0.0
        for j in range(n):
            if j == i:
                continue
            dij = delta[i, j]
            nrm = 0.0
            for d in range(p):
                diff[d] = anchor[d] - X[j, d]
                nrm += diff[d] * diff[d]
            nrm = sqrt(nrm)
            if nrm > TIE_EPS:
                scale = dij / nrm
                for d in range(p):
                    acc[d] += X[j, d] + scale * diff[d]
            else:
                for d in range(p):
                    acc[d] += X[j, d] + dij * s[d]
        if lam != 0.0:
            for t in range(indptr[i], indptr[i + 1]):
                j = indices[t]
                for d in range(p):
                    acc[d] += lam * X[j, d]
            denom = n - 1.0 + lam * (indptr[i + 1] - indptr[i])
        else:
            denom = n - 1.0
        nrm = 0.0
        for d in range(p):
            acc[d] /= denom
            nrm += acc[d] * acc[d]
        nrm = sqrt(nrm)
        scale = r / nrm if nrm > r else 1.0
        for d in range(p):
            X[i, d] = acc[d] * scale


def cclle_sweep(double[:, ::1] X, const i64[::1] indptr, const i64[::1] indices,
                const double[::1] data, const double[::1] radii,
                const i64[::1] order):
    """One Gauss-Seidel sweep of the sphere-projected CC-LLE updates, in place."""
    cdef Py_ssize_t p = X.shape[1]
    cdef Py_ssize_t k, t, j, d, i
    cdef double nrm, w
    cdef double[::1] v = np.empty(p, dtype=np.float64)

    for k in range(order.shape[0]):
        i = order[k]
        for d in range(p):
            v[d] = 0.0
        for t in range(indptr[i], indptr[i + 1]):
            j = indices[t]
            w = data[t]
            for d in range(p):
                v[d] += w * X[j, d]
        nrm = 0.0
        for d in range(p):
            nrm += v[d] * v[d]
        nrm = sqrt(nrm)
        if nrm > 0.0:
            for d in range(p):
                X[i, d] = radii[i] * v[d] / nrm


def brandes(const i64[::1] indptr, const i64[::1] indices, Py_ssize_t n):
    """Per-node shortest-path through-counts and fractional dependencies.

    Returns ``(counts, fractions)``; both are summed over unordered
    endpoint pairs with the node itself excluded as an endpoint.
    """
    cdef cnp.ndarray[f64, ndim=1] counts_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[f64, ndim=1] frac_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] counts = counts_arr
    cdef double[::1] frac = frac_arr
    cdef i64[::1] dist = np.empty(n, dtype=np.int64)
    cdef i64[::1] queue = np.empty(n, dtype=np.int64)
    cdef double[::1] sigma = np.empty(n, dtype=np.float64)
    cdef double[::1] tau = np.empty(n, dtype=np.float64)
    cdef double[::1] dep = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t src, head, tail, v, w, t, q
    cdef i64 dv

    for src in range(n):
        for v in range(n):
            dist[v] = -1
            sigma[v] = 0.0
            tau[v] = 0.0
            dep[v] = 0.0
        dist[src] = 0
        sigma[src] = 1.0
        queue[0] = src
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            dv = dist[v]
            for t in range(indptr[v], indptr[v + 1]):
                w = indices[t]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    queue[tail] = w
                    tail += 1
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
        # reverse BFS order: successors are finalized before v
        for q in range(tail - 1, -1, -1):
            v = queue[q]
            dv = dist[v]
            for t in range(indptr[v], indptr[v + 1]):
                w = indices[t]
                if dist[w] == dv + 1:
                    tau[v] += 1.0 + tau[w]
                    dep[v] += (sigma[v] / sigma[w]) * (1.0 + dep[w])
            if v != src:
                counts[v] += sigma[v] * tau[v]
                frac[v] += dep[v]

    for v in range(n):
        counts[v] *= 0.5
        frac[v] *= 0.5
    return counts_arr, frac_arr
