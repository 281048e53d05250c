"""Centrality-constrained MDS by block coordinate descent.

Each outer iteration sweeps the nodes once (Gauss-Seidel). Node ``i`` is
moved to the minimiser, over the ball ``||x|| <= r_i``, of a convex
quadratic that upper-bounds its share of the stress (plus the optional
Laplacian smoothness penalty). The bound is built by linearising the
concave ``-delta_ij ||x - x_j||`` terms at the node's current position,
so the minimiser is a weighted average followed by a radial clip. The
embedding is centred once, after the last sweep.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ccembed import kernels
from ccembed.errors import ConfigError, DataError, NumericalError
from ccembed.graph import Graph

#: Name of the generator all solver randomness flows through.
RNG_NAME = "numpy.random.PCG64"


@dataclass
class Embedding:
    X: np.ndarray
    centered: bool = True
    raw: np.ndarray | None = None

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass
class MdsConfig:
    lam: float = 0.0
    epsilon: float | None = None
    max_outer_iters: int = 500
    seed: int = 0
    p: int = 2
    tie_subgradient: np.ndarray | None = None
    sweep_order: str = "ascending"
    trace_stress: bool = True

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ConfigError("epsilon must be > 0")
        if self.max_outer_iters < 0:
            raise ConfigError("max_outer_iters must be >= 0")
        if self.p < 1:
            raise ConfigError("embedding dimension must be >= 1")
        if self.sweep_order not in ("ascending", "random"):
            raise ConfigError("sweep_order must be 'ascending' or 'random'")
        self.tie_vector()

    def resolved_epsilon(self, n: int) -> float:
        """Absolute tolerance if given, else ``1e-4 * sqrt(N p)``."""
        if self.epsilon is not None:
            return self.epsilon
        return 1e-4 * math.sqrt(n * self.p)

    def tie_vector(self) -> np.ndarray:
        if self.tie_subgradient is None:
            return np.full(self.p, 1.0 / math.sqrt(self.p))
        s = np.asarray(self.tie_subgradient, dtype=np.float64)
        if s.shape != (self.p,) or np.linalg.norm(s) > 1.0 + 1e-12:
            raise ConfigError("tie subgradient must be a p-vector with norm <= 1")
        return s


@dataclass
class TraceRecord:
    iteration: int
    stress: float
    objective: float
    smoothness: float
    step_frobenius: float


@dataclass
class SolveTrace:
    records: list[TraceRecord] = field(default_factory=list)
    initial: TraceRecord | None = None
    converged: bool = False
    epsilon: float = float("nan")

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "stress", "objective", "smoothness", "step_frobenius"])
        for r in self.records:
            w.writerow([r.iteration, _fmt(r.stress), _fmt(r.objective),
                        _fmt(r.smoothness), _fmt(r.step_frobenius)])


def _fmt(v: float) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))


def center(X: np.ndarray) -> np.ndarray:
    """Apply ``I - 11^T / N`` (subtract the column means)."""
    return X - X.mean(axis=0, keepdims=True)


def stress(X: np.ndarray, delta: np.ndarray) -> float:
    """Raw stress ``1/2 sum_ij (||x_i - x_j|| - delta_ij)^2`` over ordered pairs."""
    X = np.asarray(X, dtype=np.float64)
    delta = np.asarray(getattr(delta, "delta", delta), dtype=np.float64)
    if delta.shape != (X.shape[0], X.shape[0]):
        raise DataError("embedding and dissimilarity sizes differ")
    if X.shape[0] < 2:
        return 0.0
    r = pdist(X) - squareform(delta, checks=False)
    return float(r @ r)


def smoothness_term(X: np.ndarray, g: Graph) -> float:
    """``Tr(X^T L X)``, i.e. half the sum of squared edge lengths over ordered pairs."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] != g.n:
        raise DataError("embedding and graph sizes differ")
    return float(np.einsum("ij,ij->", X, g.laplacian @ X))


def objective(X, delta, g: Graph | None = None, lam: float = 0.0) -> float:
    """Relaxed objective: stress plus ``lam`` times the smoothness term."""
    value = stress(X, delta)
    if lam:
        value += lam * smoothness_term(X, g)
    return value


def subgradient_term(x, xj, s) -> np.ndarray:
    """An element of the subdifferential of ``||x - x_j||`` at ``x``.

    The unit direction from ``x_j`` to ``x``; ``s`` (with ``||s|| <= 1``)
    when the two points coincide.
    """
    d = np.asarray(x, dtype=np.float64) - np.asarray(xj, dtype=np.float64)
    nrm = np.linalg.norm(d)
    if nrm > 1e-15:
        return d / nrm
    return np.asarray(s, dtype=np.float64)


def block_surrogate(x, x0, i: int, X: np.ndarray, delta: np.ndarray, adjacency=None,
                    lam: float = 0.0, s=None):
    """Block cost and its majorizer for node ``i``.

    Returns ``(psi, phi)``: the true per-block cost at ``x`` (up to terms
    constant in ``x``) and the convex upper bound anchored at ``x0``. The
    other rows of ``X`` are held fixed.
    """
    n, p = X.shape
    s = np.full(p, 1.0 / math.sqrt(p)) if s is None else np.asarray(s)
    others = np.arange(n) != i
    Xo = X[others]
    d = np.asarray(getattr(delta, "delta", delta))[i, others]
    w = np.ones(n - 1)
    deg = 0.0
    if lam:
        a = np.asarray(adjacency[i].todense()).ravel() if hasattr(adjacency, "todense") else np.asarray(adjacency[i])
        w = w + lam * a[others]
        deg = float(a.sum())
    x = np.asarray(x, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    psi1 = 0.5 * (n - 1 + lam * deg) * (x @ x) - x @ (w @ Xo)
    psi2 = float(d @ np.linalg.norm(x - Xo, axis=1))
    G = np.array([subgradient_term(x0, xj, s) for xj in Xo])
    lin = d @ (np.linalg.norm(x0 - Xo, axis=1) + G @ (x - x0))
    return psi1 - psi2, psi1 - lin


def _csr(g: Graph | None, n: int):
    if g is None:
        return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    A = g.adjacency
    return A.indptr.astype(np.int64), A.indices.astype(np.int64)


def block_update(i: int, X: np.ndarray, delta, radii, g: Graph | None = None,
                 lam: float = 0.0, s=None, backend: str | None = None) -> np.ndarray:
    """New position of node ``i`` given the current state ``X`` (not modified)."""
    X = np.array(X, dtype=np.float64, order="C")
    n, p = X.shape
    if n < 2:
        raise DataError("CC-MDS needs at least 2 nodes")
    s = np.full(p, 1.0 / math.sqrt(p)) if s is None else np.asarray(s, dtype=np.float64)
    indptr, indices = _csr(g, n)
    D = np.ascontiguousarray(getattr(delta, "delta", delta), dtype=np.float64)
    kernels.get(backend).ccmds_sweep(X, D, np.asarray(radii, dtype=np.float64), indptr, indices,
                                     float(lam), s, np.array([i], dtype=np.int64))
    return X[i].copy()


def initial_positions(radii: np.ndarray, p: int, rng: np.random.Generator,
                      on_sphere: bool = False) -> np.ndarray:
    """Standard-normal rows, shrunk into (or, with ``on_sphere``, scaled
    onto) the radius of each node."""
    X = rng.standard_normal((len(radii), p))
    nrm = np.linalg.norm(X, axis=1)
    safe = np.where(nrm > 0, nrm, 1.0)
    if on_sphere:
        scale = np.where(nrm > 0, radii / safe, 0.0)
    else:
        scale = np.minimum(1.0, radii / safe)
    return X * scale[:, None]


def _validate(g, delta, radii, n_min=2):
    D = np.ascontiguousarray(getattr(delta, "delta", delta), dtype=np.float64)
    r = np.ascontiguousarray(getattr(radii, "radii", radii), dtype=np.float64)
    n = D.shape[0]
    if n < n_min:
        raise DataError(f"need at least {n_min} nodes")
    if D.shape != (n, n) or r.shape != (n,):
        raise DataError("dissimilarity and radii sizes differ")
    if g is not None and g.n != n:
        raise DataError("graph and dissimilarity sizes differ")
    if not np.all(np.isfinite(D)):
        raise NumericalError("dissimilarity matrix has non-finite entries (disconnected graph?)")
    if not np.all(np.isfinite(r)) or np.any(r < 0):
        raise DataError("radii must be finite and >= 0")
    return D, r


def solve_ccmds(g: Graph | None, delta, radii, config: MdsConfig | None = None,
                callback: Callable[[int, np.ndarray], None] | None = None,
                backend: str | None = None, X0: np.ndarray | None = None):
    """Run CC-MDS (with smoothness penalty when ``config.lam > 0``).

    ``callback(r, X)`` sees the uncentred iterate after every sweep.
    Returns ``(Embedding, SolveTrace)``.
    """
    cfg = config or MdsConfig()
    D, r = _validate(g, delta, radii)
    if cfg.lam and g is None:
        raise ConfigError("the smoothness penalty needs the graph")
    n, p = D.shape[0], cfg.p
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    if X0 is None:
        X = initial_positions(r, p, rng)
    else:
        X = np.array(X0, dtype=np.float64, order="C")
        if X.shape != (n, p):
            raise DataError("initial embedding has the wrong shape")
    X = np.ascontiguousarray(X)
    s = cfg.tie_vector()
    indptr, indices = _csr(g if cfg.lam else None, n)
    kern = kernels.get(backend)
    eps = cfg.resolved_epsilon(n)
    trace = SolveTrace(epsilon=eps)

    def record(it, step):
        st = stress(X, D) if cfg.trace_stress else float("nan")
        sm = smoothness_term(X, g) if g is not None else float("nan")
        obj = st + (cfg.lam * sm if cfg.lam else 0.0)
        return TraceRecord(it, st, obj, sm, step)

    trace.initial = record(0, float("nan"))
    order = np.arange(n, dtype=np.int64)
    for it in range(1, cfg.max_outer_iters + 1):
        prev = X.copy()
        if cfg.sweep_order == "random":
            order = rng.permutation(n).astype(np.int64)
        kern.ccmds_sweep(X, D, r, indptr, indices, float(cfg.lam), s, order)
        if not np.all(np.isfinite(X)):
            raise NumericalError(f"non-finite coordinates at outer iteration {it}; check the scale of the dissimilarities")
        step = float(np.linalg.norm(X - prev))
        trace.records.append(record(it, step))
        if callback is not None:
            callback(it, X)
        if step <= eps:
            trace.converged = True
            break
    return Embedding(center(X), True, X.copy()), trace
