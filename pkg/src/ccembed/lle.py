"""Centrality-constrained LLE.

Stage one reconstructs every node from its hop neighbourhood with weights
solving, per node,

    min  w^T H_i w - 2 h_i^T w   s.t.  1^T w = 1,  w^T H_i w <= f_i^2

in closed form from the KKT system. Stage two places the nodes on spheres
of radius ``f_i`` by Gauss-Seidel sweeps that move each node to the
direction of its weighted neighbour average.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ccembed import kernels
from ccembed.dissimilarity import apply_ridge, double_centered_kernel
from ccembed.errors import ConfigError, DataError, EmptyNeighborhoodError, NumericalError
from ccembed.graph import Graph, n_hop_neighborhood
from ccembed.mds import (Embedding, SolveTrace, TraceRecord, center, initial_positions,
                         smoothness_term, stress)

log = logging.getLogger(__name__)


class InfeasibleConstraintError(NumericalError):
    """``f^2`` is below the smallest energy reachable on ``1^T w = 1``."""

    def __init__(self, message, discriminant):
        super().__init__(message)
        self.discriminant = discriminant


@dataclass
class KktSolution:
    w: np.ndarray
    gamma: float
    mu: float
    active: bool
    feasible: bool = True


@dataclass
class LleConfig:
    hops: int = 1
    sigma: float | None = None
    epsilon: float | None = None
    max_outer_iters: int = 100
    seed: int = 0
    p: int = 2
    trace_stress: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.hops < 1:
            raise ConfigError("hop radius n must be >= 1")
        if self.sigma is not None and self.sigma < 0:
            raise ConfigError("ridge sigma must be >= 0")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ConfigError("epsilon must be > 0")
        if self.max_outer_iters < 0:
            raise ConfigError("max_outer_iters must be >= 0")
        if self.p < 1:
            raise ConfigError("embedding dimension must be >= 1")

    def resolved_epsilon(self, n: int) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return 1e-4 * math.sqrt(n * self.p)


def solve_weights(Hi: np.ndarray, hi: np.ndarray, f_c: float,
                  on_infeasible: str = "raise") -> KktSolution:
    """Closed-form solution of the per-node constrained QP.

    The equality-only minimiser is tried first; if it violates the energy
    bound, the bound is active and the multipliers solve a quadratic in
    ``mu`` whose admissible root gives ``gamma >= 0``.

    ``on_infeasible="min_energy"`` returns the smallest-energy affine
    weights (flagged ``feasible=False``) instead of raising when
    ``f_c^2`` is below that energy.
    """
    Hi = np.asarray(Hi, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    K = hi.shape[0]
    try:
        cf = sla.cho_factor(Hi, lower=True, check_finite=True)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericalError(f"H_i is not positive definite ({exc})") from None
    ones = np.ones(K)
    u = sla.cho_solve(cf, ones)
    v = sla.cho_solve(cf, hi)
    a = float(ones @ u)
    b = float(ones @ v)
    if not a > 0:
        raise NumericalError(f"1^T H_i^-1 1 = {a} <= 0; H_i is not positive definite")
    f2 = float(f_c) ** 2

    w_eq = v - ((b - 1.0) / a) * u
    energy = float(w_eq @ Hi @ w_eq)
    if energy <= f2:
        return KktSolution(w_eq, 0.0, 2.0 * (b - 1.0) / a, False)

    # Active bound: energy(w) = f^2 with w = H^-1 (h - t 1) / (1 + gamma).
    # The residual r = h - (b/a) 1 gives the stable form of b^2 - a c.
    rvec = hi - (b / a) * ones
    e = max(float(rvec @ sla.cho_solve(cf, rvec)), 0.0)
    denom = a * (a * f2 - 1.0)
    if denom <= 0.0:
        # a (a f^2 - 1) is the discriminant factor of the multiplier quadratic
        disc = denom if denom != 0 else -0.0
        if on_infeasible == "min_energy":
            return KktSolution(u / a, 0.0, float("nan"), False, feasible=False)
        raise InfeasibleConstraintError(
            f"energy bound f^2={f2:.6g} below the minimum 1/(1^T H^-1 1)={1.0 / a:.6g}; "
            f"discriminant {disc:.6g} < 0", disc)
    root = math.sqrt(e / denom)
    t = b / a - root
    gamma = a * root - 1.0
    if gamma < -1e-10:
        raise NumericalError(f"no admissible multiplier root (gamma={gamma:.3g})")
    gamma = max(gamma, 0.0)
    w = (v - t * u) / (1.0 + gamma)
    return KktSolution(w, gamma, 2.0 * t, True)


def kkt_residuals(sol: KktSolution, Hi, hi, f_c: float) -> dict[str, float]:
    """Relative residuals of the five KKT conditions.

    Primal inequality, equality, dual sign, complementary slackness and
    stationarity. Stationarity is scaled by the largest of its terms.
    """
    Hi = np.asarray(Hi)
    hi = np.asarray(hi)
    w, g, mu = sol.w, sol.gamma, sol.mu
    f2 = float(f_c) ** 2
    energy = float(w @ Hi @ w)
    scale = max(f2, 1e-300)
    Hw = Hi @ w
    grad = (1.0 + g) * Hw + 0.5 * mu - hi
    gscale = max(np.linalg.norm(hi), np.linalg.norm((1.0 + g) * Hw), abs(mu) * 0.5 * math.sqrt(len(w)), 1e-300)
    return {
        "primal": max(energy - f2, 0.0) / scale,
        "equality": abs(w.sum() - 1.0),
        "dual": max(-g, 0.0),
        "complementary": abs(g * (energy - f2)) / scale,
        "stationarity": float(np.linalg.norm(grad)) / gscale,
    }


class SharedNeighborKernel:
    """Centred kernel of the shared-neighbour dissimilarity, without the
    dense ``N x N`` matrix.

    Entries are produced on demand from sparse adjacency products; only the
    row means of the squared dissimilarities are stored.
    """

    def __init__(self, g: Graph, chunk: int = 512):
        deg = np.sort(g.degrees)
        denom = deg[-1] + deg[-2]
        if denom == 0:
            raise DataError("shared-neighbour dissimilarity undefined on an edgeless graph")
        self.g = g
        self.denom = denom
        A = g.adjacency
        AT = A.T.tocsr()
        d = g.degrees
        sums = np.empty(g.n)
        for lo in range(0, g.n, chunk):
            hi = min(lo + chunk, g.n)
            common = (A[lo:hi] @ AT).toarray()
            sq = (d[lo:hi, None] + d[None, :] - 2.0 * common) / denom
            rows = np.arange(lo, hi)
            sq[rows - lo, rows] = 0.0
            sums[lo:hi] = np.einsum("ij,ij->i", sq, sq)
        self.row_means = sums / g.n
        self.grand = self.row_means.mean()
        self.shape = (g.n, g.n)

    def block(self, idx: np.ndarray) -> np.ndarray:
        A = self.g.adjacency
        d = self.g.degrees
        sub = A[idx]
        common = (sub @ sub.T).toarray()
        delta = (d[idx, None] + d[None, idx] - 2.0 * common) / self.denom
        np.fill_diagonal(delta, 0.0)
        m = self.row_means[idx]
        return -0.5 * (delta * delta - m[:, None] - m[None, :] + self.grand)


def _kernel_block(H, idx: np.ndarray) -> np.ndarray:
    if hasattr(H, "block"):
        return H.block(idx)
    return H[np.ix_(idx, idx)]


@dataclass
class WeightMatrix:
    W: sp.csr_matrix
    gamma: np.ndarray
    mu: np.ndarray
    active: np.ndarray
    feasible: np.ndarray
    neighborhoods: list[np.ndarray] = field(default_factory=list)
    sigma: np.ndarray | None = None

    def write_csv(self, fh, node_ids=None) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "w_ij"])
        coo = self.W.tocoo()
        ids = node_ids or [str(k) for k in range(self.W.shape[0])]
        for i, j, v in zip(coo.row, coo.col, coo.data):
            w.writerow([ids[i], ids[j], repr(float(v))])


def build_weight_matrix(g: Graph, H, radii, hops: int = 1, sigma: float | None = None,
                        threads: int = 1) -> WeightMatrix:
    """Assemble the sparse reconstruction weights row by row.

    Rows whose energy bound is unattainable (radius 0, or below the minimum
    affine energy) fall back to the minimum-energy weights and are flagged
    in ``feasible``; their weights do not influence the placement of any
    node other than themselves.
    """
    radii = np.asarray(getattr(radii, "radii", radii), dtype=np.float64)
    n = g.n
    if radii.shape != (n,):
        raise DataError("radii and graph sizes differ")

    def row(i):
        members = n_hop_neighborhood(g, i, hops).members
        if members.size == 0:
            raise EmptyNeighborhoodError(
                f"node {g.node_ids[i]!r} has no neighbours within {hops} hop(s); "
                "increase n or remove isolated nodes")
        block = _kernel_block(H, np.concatenate([[i], members]))
        Hi = block[1:, 1:].copy()
        hi = block[1:, 0].copy()
        s = apply_ridge(Hi, sigma)
        sol = solve_weights(Hi, hi, radii[i], on_infeasible="min_energy")
        return members, sol, s

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(row, range(n)))
    else:
        results = [row(i) for i in range(n)]

    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(m) for m, _, _ in results])
    indices = np.concatenate([m for m, _, _ in results]).astype(np.int64)
    data = np.concatenate([sol.w for _, sol, _ in results])
    W = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    feasible = np.array([sol.feasible for _, sol, _ in results])
    if not feasible.all():
        log.info("%d row(s) with unattainable energy bound use minimum-energy weights",
                 int((~feasible).sum()))
    return WeightMatrix(
        W,
        gamma=np.array([sol.gamma for _, sol, _ in results]),
        mu=np.array([sol.mu for _, sol, _ in results]),
        active=np.array([sol.active for _, sol, _ in results]),
        feasible=feasible,
        neighborhoods=[m for m, _, _ in results],
        sigma=np.array([s for _, _, s in results]),
    )


def embedding_update(i: int, X: np.ndarray, W, radii, backend: str | None = None) -> np.ndarray:
    """New position of node ``i``: its weighted neighbour average rescaled
    to radius ``f_i``, or unchanged when that average is zero."""
    X = np.array(X, dtype=np.float64, order="C")
    W = sp.csr_matrix(getattr(W, "W", W))
    kernels.get(backend).cclle_sweep(
        X, W.indptr.astype(np.int64), W.indices.astype(np.int64), W.data.astype(np.float64),
        np.asarray(radii, dtype=np.float64), np.array([i], dtype=np.int64))
    return X[i].copy()


def reconstruction_objective(X: np.ndarray, W) -> float:
    """``sum_i ||x_i - sum_j w_ij x_j||^2``."""
    W = getattr(W, "W", W)
    R = X - W @ X
    return float(np.einsum("ij,ij->", R, R))


def solve_cclle(g: Graph, radii, config: LleConfig | None = None, delta=None, kernel=None,
                weights: WeightMatrix | None = None,
                callback: Callable[[int, np.ndarray], None] | None = None,
                backend: str | None = None):
    """Run CC-LLE.

    The kernel comes from ``kernel`` (any symmetric inner-product matrix,
    e.g. ``volume * L_pinv``, or an object with a ``block`` method) or is
    built by double-centring ``delta``. Returns ``(Embedding, SolveTrace,
    WeightMatrix)``.
    """
    cfg = config or LleConfig()
    r = np.ascontiguousarray(getattr(radii, "radii", radii), dtype=np.float64)
    n = g.n
    if r.shape != (n,) or not np.all(np.isfinite(r)) or np.any(r < 0):
        raise DataError("radii must be a finite, non-negative N-vector")
    D = None
    if delta is not None:
        D = np.asarray(getattr(delta, "delta", delta), dtype=np.float64)
        if D.shape != (n, n):
            raise DataError("dissimilarity and graph sizes differ")
    if weights is None:
        if kernel is None:
            if D is None:
                raise ConfigError("CC-LLE needs a dissimilarity matrix or a kernel")
            kernel = double_centered_kernel(D)
        weights = build_weight_matrix(g, kernel, r, cfg.hops, cfg.sigma, cfg.threads)
    W = weights.W
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    X = np.ascontiguousarray(initial_positions(r, cfg.p, rng, on_sphere=True))

    indptr = W.indptr.astype(np.int64)
    indices = W.indices.astype(np.int64)
    data = W.data.astype(np.float64)
    order = np.arange(n, dtype=np.int64)
    kern = kernels.get(backend)
    eps = cfg.resolved_epsilon(n)
    trace = SolveTrace(epsilon=eps)

    def record(it, step):
        st = stress(X, D) if (D is not None and cfg.trace_stress) else float("nan")
        return TraceRecord(it, st, reconstruction_objective(X, W), smoothness_term(X, g), step)

    trace.initial = record(0, float("nan"))
    for it in range(1, cfg.max_outer_iters + 1):
        prev = X.copy()
        kern.cclle_sweep(X, indptr, indices, data, r, order)
        if not np.all(np.isfinite(X)):
            raise NumericalError(f"non-finite coordinates at outer iteration {it}")
        step = float(np.linalg.norm(X - prev))
        trace.records.append(record(it, step))
        if callback is not None:
            callback(it, X)
        if step <= eps:
            trace.converged = True
            break
    return Embedding(center(X), True, X.copy()), trace, weights
