"""Node centralities and the centrality-to-radius transform."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ccembed import kernels
from ccembed.errors import ConfigError
from ccembed.graph import Graph, diameter, geodesic_distances

MEASURES = ("degree", "closeness", "betweenness")
TRANSFORMS = ("diameter_linear", "exponential")


@dataclass(frozen=True)
class CentralityVector:
    measure: str
    values: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class RadiusMap:
    transform: str
    params: dict
    radii: np.ndarray


def degree_centrality(g: Graph) -> CentralityVector:
    return CentralityVector("degree", g.degrees.copy())


def closeness(g: Graph) -> CentralityVector:
    """Inverse of the total hop distance to every other node."""
    g.require_connected("closeness centrality")
    if g.n == 1:
        return CentralityVector("closeness", np.zeros(1))
    totals = geodesic_distances(g).sum(axis=1)
    return CentralityVector("closeness", 1.0 / totals)


def betweenness(g: Graph, normalization: str = "global", backend: str | None = None) -> CentralityVector:
    """Shortest-path betweenness.

    ``normalization="global"`` counts, for every node, the shortest paths
    between other node pairs that pass through it, and divides by the sum of
    those counts over all nodes (values sum to 1, or are all zero when no
    shortest path has an interior node).

    ``normalization="conventional"`` is Freeman's fractional betweenness
    divided by ``(N-1)(N-2)/2``.
    """
    g.require_connected("betweenness centrality")
    A = g.adjacency
    counts, fractions = kernels.get(backend).brandes(
        A.indptr.astype(np.int64), A.indices.astype(np.int64), g.n)
    if normalization == "global":
        total = counts.sum()
        values = counts / total if total > 0 else np.zeros(g.n)
    elif normalization == "conventional":
        pairs = (g.n - 1) * (g.n - 2) / 2
        values = fractions / pairs if pairs > 0 else np.zeros(g.n)
    else:
        raise ConfigError(f"unknown betweenness normalization {normalization!r}")
    return CentralityVector("betweenness", values)


def compute(g: Graph, measure: str, **kwargs) -> CentralityVector:
    if measure == "degree":
        return degree_centrality(g)
    if measure == "closeness":
        return closeness(g)
    if measure == "betweenness":
        return betweenness(g, **kwargs)
    raise ConfigError(f"unknown centrality measure {measure!r}; choose from {MEASURES}")


def radius_map(c: CentralityVector | np.ndarray, g: Graph | None = None,
               transform: str = "diameter_linear", alpha: float = 1.0,
               beta: float = 1.0, floor: float = 0.0, diam: int | None = None) -> RadiusMap:
    """Map centralities to target radii; higher centrality, smaller radius.

    ``diameter_linear`` rescales ``c`` onto ``[0, diam/2]`` reversed, so the
    most central node lands at the origin and the least central at half the
    graph diameter. ``exponential`` is ``alpha * exp(-beta * c)``. ``floor``
    clamps radii from below.
    """
    values = np.asarray(getattr(c, "values", c), dtype=np.float64)
    if floor < 0:
        raise ConfigError("radius floor must be >= 0")
    if transform == "diameter_linear":
        if diam is None:
            if g is None:
                raise ConfigError("diameter_linear needs the graph or its diameter")
            diam = diameter(g)
        lo, hi = values.min(), values.max()
        if hi > lo:
            radii = diam / 2.0 * (1.0 - (values - lo) / (hi - lo))
        else:
            radii = np.full(values.shape, diam / 2.0)
        params = {"diameter": int(diam)}
    elif transform == "exponential":
        # beta == 0 is allowed as the degenerate constant map
        if alpha <= 0 or beta < 0:
            raise ConfigError("exponential transform needs alpha > 0 and beta >= 0")
        radii = alpha * np.exp(-beta * values)
        params = {"alpha": alpha, "beta": beta}
    else:
        raise ConfigError(f"unknown radius transform {transform!r}; choose from {TRANSFORMS}")
    if floor > 0:
        radii = np.maximum(radii, floor)
    params["floor"] = floor
    return RadiusMap(transform, params, radii)


def centrality_histogram(c: CentralityVector | np.ndarray, bins: int = 50):
    """Equal-width histogram over ``[min c, max c]``; returns ``(edges, counts)``."""
    if bins < 1:
        raise ConfigError("bins must be >= 1")
    values = np.asarray(getattr(c, "values", c), dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        # all mass in the first bin of a unit-width range
        edges = lo + np.linspace(0.0, 1.0, bins + 1)
        counts = np.zeros(bins, dtype=np.int64)
        counts[0] = values.size
        return edges, counts
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    return edges, counts
