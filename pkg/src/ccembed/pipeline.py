"""Config-driven pipeline: edge list -> centrality -> dissimilarity -> layout.

A config is a flat key/value mapping (YAML or JSON file, overridable from
the command line). Unknown keys are rejected.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ccembed import centrality as cent
from ccembed import dissimilarity as dis
from ccembed import kernels
from ccembed.errors import CCEmbedError, ConfigError
from ccembed.graph import Graph, read_edge_list
from ccembed.lle import LleConfig, SharedNeighborKernel, solve_cclle
from ccembed.mds import RNG_NAME, MdsConfig, solve_ccmds
from ccembed.render import SvgLayout, render_svg

log = logging.getLogger(__name__)

ALGORITHMS = ("ccmds", "cclle")
KERNELS = ("delta", "laplacian_pinv")


class StageError(CCEmbedError):
    """A module error re-raised with the pipeline stage that produced it."""

    def __init__(self, stage: str, cause: CCEmbedError):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code


@dataclass
class PipelineConfig:
    input: str = ""
    algorithm: str = "ccmds"
    centrality: str = "betweenness"
    betweenness_normalization: str = "global"
    radius_transform: str = "diameter_linear"
    alpha: float = 1.0
    beta: float = 1.0
    radius_floor: float = 0.0
    dissimilarity: str = "ectd"
    kernel: str = "delta"
    lam: float = 0.0
    epsilon: float | None = None
    sigma: float | None = None
    hops: int = 1
    p: int = 2
    seed: int = 0
    max_iters: int = 500
    sweep_order: str = "ascending"
    output_dir: str = "out"
    draw_edges: bool | None = None
    write_delta: bool = False
    strict_edges: bool = False
    threads: int = 1
    trace_stress: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        checks = [
            (self.algorithm in ALGORITHMS, f"algorithm must be one of {ALGORITHMS}"),
            (self.centrality in cent.MEASURES, f"centrality must be one of {cent.MEASURES}"),
            (self.betweenness_normalization in ("global", "conventional"),
             "betweenness_normalization must be 'global' or 'conventional'"),
            (self.radius_transform in cent.TRANSFORMS, f"radius_transform must be one of {cent.TRANSFORMS}"),
            (self.dissimilarity in dis.METRICS, f"dissimilarity must be one of {dis.METRICS}"),
            (self.kernel in KERNELS, f"kernel must be one of {KERNELS}"),
            (self.p in (2, 3), "p must be 2 or 3"),
            (self.lam >= 0, "lam must be >= 0"),
            (self.epsilon is None or self.epsilon > 0, "epsilon must be > 0"),
            (self.sigma is None or self.sigma >= 0, "sigma must be >= 0"),
            (self.hops >= 1, "hops must be >= 1"),
            (self.max_iters >= 0, "max_iters must be >= 0"),
            (self.radius_floor >= 0, "radius_floor must be >= 0"),
            (self.threads >= 1, "threads must be >= 1"),
            (self.sweep_order in ("ascending", "random"), "sweep_order must be 'ascending' or 'random'"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        if self.kernel == "laplacian_pinv" and self.algorithm != "cclle":
            raise ConfigError("kernel=laplacian_pinv only applies to cclle")

    @classmethod
    def from_mapping(cls, mapping: dict) -> PipelineConfig:
        names = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(mapping) - set(names))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        kwargs = {}
        for key, value in mapping.items():
            if isinstance(value, (dict, list)):
                raise ConfigError(f"config must be flat; {key!r} is nested")
            kwargs[key] = _coerce(names[key], value)
        return cls(**kwargs)

    def to_mapping(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(f: dataclasses.Field, value):
    if value is None:
        return None
    kind = str(f.type)
    try:
        if kind.startswith("bool"):
            if isinstance(value, str):
                low = value.lower()
                if low in ("auto", "none", "null"):
                    return None
                if low not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(value)
                return low in ("true", "1", "yes")
            return bool(value)
        if kind.startswith("int"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if kind.startswith("float"):
            if isinstance(value, str) and value.lower() in ("none", "null", "auto"):
                return None
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {f.name!r}: {value!r}") from None


def load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a flat key/value mapping")
    if "manifest_version" in data:
        data = data["config"]
    return data


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_centralities(path, g: Graph, values) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("node_id,value\n")
        for k, v in enumerate(values):
            fh.write(f"{g.node_ids[k]},{float(v)!r}\n")


def write_histogram(path, edges, counts) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("bin_left,bin_right,count\n")
        for k, c in enumerate(counts):
            fh.write(f"{float(edges[k])!r},{float(edges[k + 1])!r},{int(c)}\n")


def write_embedding(path, g: Graph, X: np.ndarray) -> None:
    cols = ["x", "y", "z"][: X.shape[1]]
    with open(path, "w", newline="") as fh:
        fh.write("node_id," + ",".join(cols) + "\n")
        for k in range(g.n):
            fh.write(g.node_ids[k] + "," + ",".join(repr(float(v)) for v in X[k]) + "\n")


def read_embedding(path) -> tuple[list[str], np.ndarray]:
    ids, rows = [], []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[0] != "node_id" or len(header) < 3:
            raise ConfigError(f"{path}: not an embedding CSV")
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != len(header):
                continue
            ids.append(parts[0])
            rows.append([float(v) for v in parts[1:]])
    return ids, np.array(rows)


class _Stage:
    def __init__(self, name, timings):
        self.name = name
        self.timings = timings

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.name] = time.perf_counter() - self.t0
        if isinstance(exc, CCEmbedError) and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def run_pipeline(cfg: PipelineConfig, backend: str | None = None) -> dict:
    """Run one configured embedding and write its artefacts.

    Returns the manifest (also written as ``manifest.json``): the resolved
    config, the input hash, a hash per output file and the generator name,
    which together reproduce every numeric output.
    """
    if not cfg.input:
        raise ConfigError("no input edge list given")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}
    files: list[str] = []

    with _Stage("parse", timings):
        try:
            g = read_edge_list(cfg.input, strict=cfg.strict_edges)
        except OSError as exc:
            raise ConfigError(f"cannot read input {cfg.input}: {exc}") from None
        g.require_connected("embedding")

    with _Stage("centrality", timings):
        kwargs = {"normalization": cfg.betweenness_normalization} if cfg.centrality == "betweenness" else {}
        c = cent.compute(g, cfg.centrality, **kwargs)
        rmap = cent.radius_map(c, g, cfg.radius_transform, cfg.alpha, cfg.beta, cfg.radius_floor)
    write_centralities(out / "centralities.csv", g, c.values)
    files.append("centralities.csv")

    with _Stage("dissimilarity", timings):
        dm = None
        kernel = None
        if cfg.algorithm == "cclle" and cfg.kernel == "laplacian_pinv":
            ck = dis.commute_kernel(g)
            kernel = ck.volume * ck.L_pinv
            delta_meta = {"metric": "ectd", "kernel": "laplacian_pinv", "volume": ck.volume}
        elif (cfg.algorithm == "cclle" and cfg.dissimilarity == "shared_neighbors"
              and g.n > dis.ECTD_MAX_NODES):
            kernel = SharedNeighborKernel(g)
            delta_meta = {"metric": "shared_neighbors", "kernel": "streamed"}
        else:
            dm = dis.compute(g, cfg.dissimilarity)
            delta_meta = {
                "metric": dm.metric, "kernel": "double_centered", "n": g.n,
                "min_offdiag": float(dm.delta[~np.eye(g.n, dtype=bool)].min()) if g.n > 1 else 0.0,
                "max": float(dm.delta.max()), "mean": float(dm.delta.mean()),
            }
    with open(out / "delta.json", "w") as fh:
        json.dump(delta_meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files.append("delta.json")
    if cfg.write_delta and dm is not None:
        with open(out / "delta.csv", "w", newline="") as fh:
            dis.write_delta_csv(dm, g.node_ids, fh)
        files.append("delta.csv")

    with _Stage("solve", timings):
        if cfg.algorithm == "ccmds":
            mcfg = MdsConfig(lam=cfg.lam, epsilon=cfg.epsilon, max_outer_iters=cfg.max_iters,
                             seed=cfg.seed, p=cfg.p, sweep_order=cfg.sweep_order,
                             trace_stress=cfg.trace_stress)
            emb, trace = solve_ccmds(g, dm, rmap.radii, mcfg, backend=backend)
            weights = None
        else:
            lcfg = LleConfig(hops=cfg.hops, sigma=cfg.sigma, epsilon=cfg.epsilon,
                             max_outer_iters=cfg.max_iters, seed=cfg.seed, p=cfg.p,
                             trace_stress=cfg.trace_stress, threads=cfg.threads)
            emb, trace, weights = solve_cclle(g, rmap.radii, lcfg, delta=dm, kernel=kernel,
                                              backend=backend)

    write_embedding(out / "embedding.csv", g, emb.X)
    files.append("embedding.csv")
    with open(out / "trace.csv", "w", newline="") as fh:
        trace.write_csv(fh)
    files.append("trace.csv")
    if weights is not None:
        with open(out / "weights.csv", "w", newline="") as fh:
            weights.write_csv(fh, list(g.node_ids))
        files.append("weights.csv")

    if cfg.p == 2:
        with _Stage("render", timings):
            svg = render_svg(emb.X, g, c, SvgLayout(draw_edges=cfg.draw_edges))
        with open(out / "layout.svg", "w") as fh:
            fh.write(svg)
        files.append("layout.svg")

    manifest = {
        "manifest_version": 1,
        "config": cfg.to_mapping(),
        "input_sha256": _sha256(cfg.input),
        "graph": {"nodes": g.n, "edges": g.n_edges, "dropped_self_loops": g.dropped_self_loops},
        "rng": RNG_NAME,
        "numpy_version": np.__version__,
        "backend": backend or kernels.BACKEND,
        "iterations": len(trace),
        "converged": trace.converged,
        "files": {name: _sha256(out / name) for name in files},
        "timings_seconds": timings,
    }
    if weights is not None:
        manifest["weights"] = {"rows_active": int(weights.active.sum()),
                               "rows_unattainable_bound": int((~weights.feasible).sum())}
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("CCEMBED_THREADS", "1")))
    except ValueError:
        raise ConfigError("CCEMBED_THREADS must be an integer") from None
