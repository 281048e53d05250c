"""Undirected simple graphs: parsing, derived matrices, hop distances."""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from ccembed.errors import DataError, DisconnectedGraphError, ParseError

log = logging.getLogger(__name__)

#: Above this node count geodesics are only computed per source.
DENSE_GEODESIC_CAP = 20_000


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph on nodes ``0..N-1``.

    ``node_ids`` keeps the external token of every internal index.
    """

    adjacency: sp.csr_matrix
    node_ids: tuple[str, ...]
    dropped_self_loops: int = 0
    duplicate_edges: int = 0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        A = self.adjacency
        if A.shape[0] != A.shape[1] or A.shape[0] != len(self.node_ids):
            raise DataError("adjacency shape does not match node count")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   node_ids: Sequence[str] | None = None) -> Graph:
        """Build from integer pairs; self-loops dropped, duplicates merged."""
        e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        loops = int(np.count_nonzero(e[:, 0] == e[:, 1]))
        e = e[e[:, 0] != e[:, 1]]
        if e.size and (e.min() < 0 or e.max() >= n):
            raise DataError("edge endpoint out of range")
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        A = sp.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n)).tocsr()
        A.data[:] = 1.0
        A.sort_indices()
        ids = tuple(str(t) for t in node_ids) if node_ids is not None else tuple(map(str, range(n)))
        return cls(A, ids, dropped_self_loops=loops, duplicate_edges=len(e) - A.nnz // 2)

    @classmethod
    def from_dense(cls, A, node_ids=None) -> Graph:
        A = np.asarray(A)
        i, j = np.nonzero(np.triu(A + A.T, 1))
        return cls.from_edges(A.shape[0], zip(i.tolist(), j.tolist()), node_ids)

    @classmethod
    def from_networkx(cls, G) -> Graph:
        nodes = list(G.nodes())
        index = {v: k for k, v in enumerate(nodes)}
        return cls.from_edges(len(nodes), ((index[u], index[v]) for u, v in G.edges()), nodes)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return self.adjacency.nnz // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr).astype(np.float64)

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        return (sp.diags(self.degrees) - self.adjacency).tocsr()

    def dense_adjacency(self) -> np.ndarray:
        return self.adjacency.toarray()

    def neighbors(self, i: int) -> np.ndarray:
        A = self.adjacency
        return A.indices[A.indptr[i]:A.indptr[i + 1]]

    def edges(self) -> np.ndarray:
        """``(M, 2)`` array of edges with ``i < j``, sorted."""
        upper = sp.triu(self.adjacency, 1).tocoo()
        e = np.column_stack([upper.row, upper.col]).astype(np.int64)
        return e[np.lexsort((e[:, 1], e[:, 0]))]

    @cached_property
    def components(self) -> np.ndarray:
        _, labels = csgraph.connected_components(self.adjacency, directed=False)
        return labels

    @property
    def is_connected(self) -> bool:
        return self.n > 0 and bool(np.all(self.components == 0))

    def require_connected(self, what: str = "operation") -> None:
        if not self.is_connected:
            labels = self.components
            a = 0
            b = int(np.flatnonzero(labels != labels[0])[0])
            raise DisconnectedGraphError(
                f"{what} needs a connected graph: node {self.node_ids[a]!r} "
                f"(component {labels[a]}) cannot reach node {self.node_ids[b]!r} "
                f"(component {labels[b]})"
            )

    def index_of(self, node_id: str) -> int:
        try:
            return self._index[str(node_id)]
        except KeyError:
            raise DataError(f"unknown node {node_id!r}") from None

    @cached_property
    def _index(self) -> dict[str, int]:
        return {t: k for k, t in enumerate(self.node_ids)}

    @cached_property
    def _geodesics(self) -> np.ndarray:
        D = csgraph.shortest_path(self.adjacency, method="D", directed=False, unweighted=True)
        D.setflags(write=False)
        return D


def parse_edge_list(source: str | bytes | IO, strict: bool = False) -> Graph:
    """Parse a whitespace-separated edge list.

    Lines starting with ``#`` and blank lines are skipped. Node tokens are
    arbitrary strings, re-indexed densely in order of first appearance.
    Reversed duplicates are symmetrized away unless ``strict`` is set, in
    which case they raise :class:`ParseError`.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)

    index: dict[str, int] = {}
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 2 node tokens, got {len(tokens)}: {line!r}", lineno)
        u = index.setdefault(tokens[0], len(index))
        v = index.setdefault(tokens[1], len(index))
        if strict and (v, u) in seen and u != v:
            raise ParseError(f"directed duplicate of edge {tokens[1]} {tokens[0]}", lineno)
        seen.add((u, v))
        pairs.append((u, v))

    if not pairs:
        raise ParseError("edge list contains no edges")
    ids = sorted(index, key=index.get)
    g = Graph.from_edges(len(ids), pairs, ids)
    if g.dropped_self_loops:
        log.warning("dropped %d self-loop(s)", g.dropped_self_loops)
    g.metadata["input_edge_lines"] = len(pairs)
    return g


def read_edge_list(path, strict: bool = False) -> Graph:
    with open(path, "rb") as fh:
        return parse_edge_list(fh, strict=strict)


def serialize_edge_list(g: Graph) -> str:
    lines = [f"{g.node_ids[i]} {g.node_ids[j]}" for i, j in g.edges()]
    return "\n".join(lines) + "\n"


def geodesic_distances(g: Graph, cap: int = DENSE_GEODESIC_CAP) -> np.ndarray:
    """Dense hop-count matrix; unreachable pairs are ``np.inf``.

    Entries are integral floats so that ``inf`` can act as the sentinel.
    """
    if g.n > cap:
        raise DataError(
            f"N={g.n} exceeds the dense geodesic cap {cap}; use geodesics_from() per source"
        )
    return g._geodesics


def geodesics_from(g: Graph, sources) -> np.ndarray:
    """Hop counts from one source (1-D) or several sources (2-D)."""
    return csgraph.shortest_path(g.adjacency, method="D", directed=False,
                                 unweighted=True, indices=sources)


def diameter(g: Graph) -> int:
    g.require_connected("diameter")
    if g.n <= DENSE_GEODESIC_CAP:
        return int(geodesic_distances(g).max())
    return int(max(geodesics_from(g, s).max() for s in range(g.n)))


@dataclass(frozen=True)
class Neighborhood:
    center: int
    hop_radius: int
    members: np.ndarray

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def empty(self) -> bool:
        return len(self.members) == 0


def n_hop_neighborhood(g: Graph, i: int, n: int = 1) -> Neighborhood:
    """Nodes within ``n`` hops of ``i`` (excluding ``i``), ascending."""
    if not 0 <= i < g.n:
        raise DataError(f"node index {i} out of range")
    if n < 1:
        raise DataError("hop radius must be >= 1")
    if n == 1:
        members = np.sort(g.neighbors(i)).astype(np.int64)
        return Neighborhood(i, n, members)
    A = g.adjacency
    visited = np.zeros(g.n, dtype=bool)
    visited[i] = True
    frontier = np.array([i])
    for _ in range(n):
        nxt = np.unique(A[frontier].indices)
        nxt = nxt[~visited[nxt]]
        if nxt.size == 0:
            break
        visited[nxt] = True
        frontier = nxt
    visited[i] = False
    return Neighborhood(i, n, np.flatnonzero(visited).astype(np.int64))
