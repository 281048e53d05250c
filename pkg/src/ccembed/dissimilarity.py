"""Node dissimilarities, the Laplacian pseudoinverse and centred kernels."""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ccembed.errors import ConfigError, DataError, EmptyNeighborhoodError, NumericalError
from ccembed.graph import Graph, Neighborhood, geodesic_distances

METRICS = ("shared_neighbors", "adjacency_rows", "shortest_path", "ectd")

#: Largest N for which the dense pseudoinverse is attempted.
ECTD_MAX_NODES = 5_000
#: Largest N for dense CSV export.
CSV_MAX_NODES = 2_000
#: Relative eigenvalue cut-off for the pseudoinverse.
EIG_RTOL = 1e-9


@dataclass(frozen=True)
class DissimilarityMatrix:
    delta: np.ndarray
    metric: str

    @property
    def squared(self) -> np.ndarray:
        return self.delta * self.delta


@dataclass(frozen=True)
class CommuteKernel:
    L_pinv: np.ndarray
    volume: float

    def commute_times(self) -> np.ndarray:
        """Average commute times ``n(i, j)`` for all pairs."""
        d = np.diag(self.L_pinv)
        n = self.volume * (d[:, None] + d[None, :] - 2.0 * self.L_pinv)
        np.fill_diagonal(n, 0.0)
        return np.maximum(n, 0.0, out=n)


def _require_pairs(g: Graph):
    if g.n < 2:
        raise DataError("dissimilarities need at least 2 nodes")


def shared_neighbor_delta(g: Graph) -> DissimilarityMatrix:
    """Size of the symmetric difference of neighbour sets, normalised by
    the sum of the two largest degrees so entries fall in ``[0, 1]``."""
    _require_pairs(g)
    deg = np.sort(g.degrees)
    denom = deg[-1] + deg[-2]
    if denom == 0:
        raise DataError("shared-neighbour dissimilarity undefined on an edgeless graph")
    A = g.adjacency
    common = (A @ A).toarray()
    d = g.degrees
    delta = (d[:, None] + d[None, :] - 2.0 * common) / denom
    np.fill_diagonal(delta, 0.0)
    return DissimilarityMatrix(delta, "shared_neighbors")


def adjacency_row_delta(g: Graph) -> DissimilarityMatrix:
    """Euclidean distance between rows of the adjacency matrix."""
    _require_pairs(g)
    A = g.adjacency
    common = (A @ A).toarray()
    d = g.degrees
    sq = np.maximum(d[:, None] + d[None, :] - 2.0 * common, 0.0)
    delta = np.sqrt(sq)
    np.fill_diagonal(delta, 0.0)
    return DissimilarityMatrix(delta, "adjacency_rows")


def shortest_path_delta(g: Graph) -> DissimilarityMatrix:
    g.require_connected("shortest-path dissimilarity")
    return DissimilarityMatrix(np.array(geodesic_distances(g), dtype=np.float64), "shortest_path")


def commute_kernel(g: Graph) -> CommuteKernel:
    """Moore-Penrose pseudoinverse of the Laplacian via ``eigh``.

    Eigenvalues below ``EIG_RTOL * lambda_max`` are treated as zero; more
    than one such eigenvalue means the graph is disconnected.
    """
    if g.n > ECTD_MAX_NODES:
        raise DataError(
            f"commute-time kernel refused for N={g.n} > {ECTD_MAX_NODES}; "
            "use the shortest_path metric for large graphs"
        )
    if g.n < 2:
        raise DataError("commute times need at least 2 nodes")
    L = g.laplacian.toarray()
    lam, U = sla.eigh(L)
    tol = EIG_RTOL * max(lam[-1], 0.0)
    zero = lam <= tol
    if zero.sum() > 1 or lam[-1] <= 0:
        raise DataError(f"graph appears disconnected ({int(zero.sum())} near-zero Laplacian eigenvalues)")
    inv = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, lam))
    Lp = (U * inv) @ U.T
    Lp = 0.5 * (Lp + Lp.T)
    return CommuteKernel(Lp, float(2 * g.n_edges))


def ectd_delta(g: Graph, kernel: CommuteKernel | None = None) -> DissimilarityMatrix:
    """Euclidean commute-time distance: square root of the commute times."""
    kernel = kernel or commute_kernel(g)
    return DissimilarityMatrix(np.sqrt(kernel.commute_times()), "ectd")


def compute(g: Graph, metric: str) -> DissimilarityMatrix:
    if metric == "shared_neighbors":
        return shared_neighbor_delta(g)
    if metric == "adjacency_rows":
        return adjacency_row_delta(g)
    if metric == "shortest_path":
        return shortest_path_delta(g)
    if metric == "ectd":
        return ectd_delta(g)
    raise ConfigError(f"unknown dissimilarity metric {metric!r}; choose from {METRICS}")


def double_centered_kernel(delta: DissimilarityMatrix | np.ndarray) -> np.ndarray:
    """``H = -1/2 J D2 J`` with ``D2`` the elementwise square of ``delta``.

    Computed with row/column means instead of forming ``J``.
    """
    D = np.asarray(getattr(delta, "delta", delta), dtype=np.float64)
    H = D * D
    row = H.mean(axis=1)
    col = H.mean(axis=0)
    grand = row.mean()
    H -= row[:, None]
    H -= col[None, :]
    H += grand
    H *= -0.5
    return H


def default_ridge(Hi: np.ndarray) -> float:
    K = Hi.shape[0]
    return 1e-8 * (abs(np.trace(Hi)) / K + 1.0)


def apply_ridge(Hi: np.ndarray, sigma: float | None = None, ensure_pd: bool = True):
    """Add ``sigma`` to the diagonal of ``Hi`` in place; return the shift used.

    With ``ensure_pd`` an indefinite block (non-Euclidean dissimilarities
    such as hop counts) gets the extra shift ``-lambda_min`` so that the
    result has smallest eigenvalue ``sigma``.
    """
    if sigma is None:
        sigma = default_ridge(Hi)
    if sigma < 0:
        raise ConfigError("ridge sigma must be >= 0")
    shift = sigma
    if ensure_pd:
        try:
            np.linalg.cholesky(Hi + sigma * np.eye(Hi.shape[0]))
        except np.linalg.LinAlgError:
            lam_min = sla.eigvalsh(Hi, subset_by_index=[0, 0])[0]
            shift = sigma + max(-lam_min, 0.0)
            if shift <= 0:
                shift = np.finfo(float).eps * max(1.0, abs(np.trace(Hi)))
    Hi[np.diag_indices_from(Hi)] += shift
    return shift


def ridge_submatrix(H: np.ndarray, nbhd: Neighborhood | np.ndarray, center: int | None = None,
                    sigma: float | None = None, ensure_pd: bool = True):
    """Neighbourhood block ``H_i + sigma I`` and cross-column ``h_i``.

    ``sigma=None`` uses a scale-aware default, ``1e-8 * (trace/K + 1)``.
    """
    members = getattr(nbhd, "members", nbhd)
    if center is None:
        center = nbhd.center
    members = np.asarray(members, dtype=np.int64)
    if members.size == 0:
        raise EmptyNeighborhoodError(f"node {center} has an empty neighbourhood")
    Hi = H[np.ix_(members, members)].copy()
    hi = H[members, center].copy()
    apply_ridge(Hi, sigma, ensure_pd)
    return Hi, hi


def check_dissimilarity(delta: np.ndarray, atol: float = 0.0) -> None:
    """Raise if ``delta`` is not a square, symmetric, non-negative,
    zero-diagonal matrix."""
    delta = np.asarray(delta)
    if delta.ndim != 2 or delta.shape[0] != delta.shape[1]:
        raise DataError("dissimilarity matrix must be square")
    if not np.all(np.isfinite(delta)):
        raise NumericalError("dissimilarity matrix has non-finite entries")
    if np.any(delta < -atol):
        raise DataError("dissimilarities must be non-negative")
    if np.any(np.abs(np.diag(delta)) > atol):
        raise DataError("dissimilarity diagonal must be zero")
    if np.max(np.abs(delta - delta.T), initial=0.0) > atol:
        raise DataError("dissimilarity matrix must be symmetric")


def write_delta_csv(dm: DissimilarityMatrix, node_ids, fh) -> None:
    n = dm.delta.shape[0]
    if n > CSV_MAX_NODES:
        raise DataError(f"dense CSV export limited to N <= {CSV_MAX_NODES}")
    fh.write(f"# metric: {dm.metric}\n")
    fh.write("node_id," + ",".join(node_ids) + "\n")
    for k in range(n):
        fh.write(node_ids[k] + "," + ",".join(repr(float(v)) for v in dm.delta[k]) + "\n")


def read_delta_csv(fh) -> tuple[DissimilarityMatrix, list[str]]:
    if isinstance(fh, str):
        fh = io.StringIO(fh)
    metric = "unknown"
    rows = []
    ids = None
    for line in fh:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            if key.strip() == "metric":
                metric = value.strip()
            continue
        parts = line.split(",")
        if ids is None:
            ids = parts[1:]
            continue
        rows.append([float(v) for v in parts[1:]])
    delta = np.array(rows, dtype=np.float64)
    if ids is None or delta.shape != (len(ids), len(ids)):
        raise DataError("malformed dissimilarity CSV")
    check_dissimilarity(delta)
    return DissimilarityMatrix(delta, metric), ids
