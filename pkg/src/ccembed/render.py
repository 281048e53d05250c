"""SVG drawings and edge-length summaries of 2-D embeddings."""
from __future__ import annotations

import colorsys
import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ccembed.errors import ConfigError, DataError
from ccembed.graph import Graph
from ccembed.mds import smoothness_term

#: Hue of the most central node (violet) and of the least central (red).
HUE_HIGH = 270.0
HUE_LOW = 0.0
#: Above this node count edges are left out unless asked for.
EDGE_SUPPRESS_ABOVE = 1000


@dataclass
class SvgLayout:
    width: float = 800.0
    height: float = 800.0
    node_radius: float = 3.0
    draw_edges: bool | None = None
    margin: float = 0.05
    edge_color: str = "#b0b0b0"
    edge_width: float = 0.5

    def edges_for(self, n: int) -> bool:
        return n <= EDGE_SUPPRESS_ABOVE if self.draw_edges is None else self.draw_edges


def centrality_color(values: np.ndarray) -> list[str]:
    """Hex colours from the centrality quantile: red lowest, violet highest."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 1 or np.ptp(values) == 0:
        q = np.ones(values.size)
    else:
        q = (rankdata(values, method="average") - 1.0) / (values.size - 1.0)
        q = (q - q.min()) / (q.max() - q.min())
    out = []
    for qi in q:
        hue = (HUE_LOW + qi * (HUE_HIGH - HUE_LOW)) / 360.0
        r, g, b = colorsys.hls_to_rgb(hue, 0.5, 1.0)
        out.append("#{:02x}{:02x}{:02x}".format(round(r * 255), round(g * 255), round(b * 255)))
    return out


def _canvas_coords(X: np.ndarray, opts: SvgLayout) -> np.ndarray:
    mx = opts.margin * opts.width
    my = opts.margin * opts.height
    w = opts.width - 2 * mx
    h = opts.height - 2 * my
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    s = span.max()
    if s == 0:
        return np.tile([opts.width / 2, opts.height / 2], (X.shape[0], 1))
    scale = min(w, h) / s
    # centre the drawing; flip y so that +y points up
    cx = opts.width / 2 + (X[:, 0] - lo[0] - span[0] / 2) * scale
    cy = opts.height / 2 - (X[:, 1] - lo[1] - span[1] / 2) * scale
    return np.column_stack([cx, cy])


def render_svg(X, g: Graph, c, opts: SvgLayout | None = None) -> str:
    """SVG 1.1 document: one circle per node (ascending id), optional edges."""
    opts = opts or SvgLayout()
    X = np.asarray(getattr(X, "X", X), dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != 2:
        raise ConfigError(f"SVG output needs a 2-D embedding (got p={X.shape[-1]}); write CSV instead")
    if X.shape[0] != g.n:
        raise DataError("embedding and graph sizes differ")
    values = np.asarray(getattr(c, "values", c), dtype=np.float64)
    P = _canvas_coords(X, opts)
    colors = centrality_color(values)

    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "version": "1.1",
        "width": f"{opts.width:g}",
        "height": f"{opts.height:g}",
        "viewBox": f"0 0 {opts.width:g} {opts.height:g}",
    })
    if opts.edges_for(g.n):
        eg = ET.SubElement(svg, "g", {"id": "edges", "stroke": opts.edge_color,
                                      "stroke-width": f"{opts.edge_width:g}"})
        for i, j in g.edges():
            ET.SubElement(eg, "line", {
                "x1": f"{P[i, 0]:.3f}", "y1": f"{P[i, 1]:.3f}",
                "x2": f"{P[j, 0]:.3f}", "y2": f"{P[j, 1]:.3f}",
            })
    ng = ET.SubElement(svg, "g", {"id": "nodes"})
    for k in range(g.n):
        circle = ET.SubElement(ng, "circle", {
            "id": f"n{k}",
            "cx": f"{P[k, 0]:.3f}", "cy": f"{P[k, 1]:.3f}",
            "r": f"{opts.node_radius:g}", "fill": colors[k],
        })
        ET.SubElement(circle, "title").text = g.node_ids[k]
    body = ET.tostring(svg, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


def edge_length_report(X, g: Graph) -> dict[str, float]:
    """Mean and max embedded edge length, plus ``Tr(X^T L X)``."""
    X = np.asarray(getattr(X, "X", X), dtype=np.float64)
    e = g.edges()
    if len(e):
        lengths = np.linalg.norm(X[e[:, 0]] - X[e[:, 1]], axis=1)
        mean, mx = float(lengths.mean()), float(lengths.max())
    else:
        mean = mx = 0.0
    return {"mean_edge_length": mean, "max_edge_length": mx,
            "smoothness": smoothness_term(X, g)}
