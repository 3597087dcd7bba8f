"""Synthetic weighted graphs, geodesic targets, datasets, and edit distance.

Graphs are order-2 DenseTensors of non-negative edge weights; an entry above
zero is an edge.  Generated samples draw one of five labeled topologies on a
random node relabeling with weights |N(0, sigma^2)|, symmetric by default.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .tensor import DenseTensor, Permutation, permute

DATASET_FORMAT = "permtensor-dataset-v1"

TOPOLOGIES = ("complete", "star", "cycle", "path", "wheel")

_MIN_NODES = {"complete": 2, "star": 3, "cycle": 3, "path": 2, "wheel": 4}

TASKS = ("diameter", "eccentricity")

EDIT_MAX_NODES = 8

_STREAM_TRAIN, _STREAM_TEST = 0, 1


def eligible_topologies(n: int) -> tuple[str, ...]:
    """Topologies defined at node count n, in the fixed label order."""
    return tuple(t for t in TOPOLOGIES if n >= _MIN_NODES[t])


def _topology_edges(topology: str, n: int) -> list[tuple[int, int]]:
    if topology not in _MIN_NODES:
        raise ValueError(f"unknown topology {topology!r}; choose one of {TOPOLOGIES}")
    if n < _MIN_NODES[topology]:
        raise ValueError(f"n too small for topology: {topology} needs n >= {_MIN_NODES[topology]}")
    if topology == "complete":
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    if topology == "star":
        return [(0, i) for i in range(1, n)]
    if topology == "cycle":
        return [(i, (i + 1) % n) for i in range(n)]
    if topology == "path":
        return [(i, i + 1) for i in range(n - 1)]
    # wheel: hub 0, rim cycle on 1..n-1 plus spokes; n=4 degenerates to K4.
    rim = [(i, i + 1 if i + 1 < n else 1) for i in range(1, n)]
    spokes = [(0, i) for i in range(1, n)]
    return spokes + rim


@dataclass(frozen=True, eq=False)
class GraphSample:
    graph: DenseTensor
    topology: str
    diameter: float | None = None
    ecc: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.graph.n


def generate(
    topology: str,
    n: int,
    weight_sigma: float = 1.0,
    rng=0,
    symmetric: bool = True,
) -> GraphSample:
    """One sample: canonical topology, half-normal weights, random relabeling.

    The RNG is consumed in a fixed order (edge weights in canonical edge
    order, then the relabeling permutation), so a seed fully determines the
    sample.
    """
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    w = np.zeros((n, n))
    for i, j in _topology_edges(topology, n):
        wij = abs(gen.normal(0.0, weight_sigma))
        w[i, j] = wij
        w[j, i] = wij if symmetric else abs(gen.normal(0.0, weight_sigma))
    sigma = Permutation(gen.permutation(n))
    return GraphSample(permute(DenseTensor(2, n, w), sigma), topology)


def all_pairs_shortest(g: DenseTensor) -> np.ndarray:
    """Geodesic distance matrix (Floyd-Warshall, fixed visit order)."""
    if g.order != 2:
        raise ValueError("shortest paths need an order-2 tensor")
    n = g.n
    d = np.where(g.data > 0, g.data, np.inf)
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :], out=d)
    if np.isinf(d).any():
        raise ValueError("infinite distance: graph is disconnected")
    return d


def eccentricities(g: DenseTensor) -> np.ndarray:
    return all_pairs_shortest(g).max(axis=1)


def diameter(g: DenseTensor) -> float:
    return float(all_pairs_shortest(g).max())


def with_targets(sample: GraphSample, tasks=TASKS) -> GraphSample:
    dist = all_pairs_shortest(sample.graph)
    ecc = dist.max(axis=1)
    return replace(
        sample,
        diameter=float(ecc.max()) if "diameter" in tasks else None,
        ecc=ecc if "eccentricity" in tasks else None,
    )


@dataclass(frozen=True)
class DatasetConfig:
    sizes: tuple[int, ...] = (5, 10)
    train_per_size: int = 0
    test_per_size: int = 0
    tasks: tuple[str, ...] = TASKS
    weight_sigma: float = 1.0
    symmetric: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        for t in self.tasks:
            if t not in TASKS:
                raise ValueError(f"unknown task {t!r}; choose from {TASKS}")
        if not self.sizes:
            raise ValueError("sizes must be non-empty")


@dataclass
class Dataset:
    config: DatasetConfig
    train: list[GraphSample]
    test: list[GraphSample]
    r_bound: float = 0.0  # realized max |entry| over all samples


def _make_split(cfg: DatasetConfig, stream: int, per_size: int) -> list[GraphSample]:
    samples = []
    for n in cfg.sizes:
        topos = eligible_topologies(n)
        if not topos:
            raise ValueError(f"no topology is defined for n = {n}")
        for i in range(per_size):
            rng = np.random.default_rng((cfg.seed, stream, n, i))
            topology = topos[int(rng.integers(len(topos)))]
            sample = generate(topology, n, cfg.weight_sigma, rng, cfg.symmetric)
            samples.append(with_targets(sample, cfg.tasks))
    return samples


def make_dataset(cfg: DatasetConfig) -> Dataset:
    """Deterministic dataset; every sample has its own (seed, split, n, index)
    RNG stream, so generation order and worker count cannot change content."""
    train = _make_split(cfg, _STREAM_TRAIN, cfg.train_per_size)
    test = _make_split(cfg, _STREAM_TEST, cfg.test_per_size)
    r = 0.0
    for s in itertools.chain(train, test):
        r = max(r, float(np.abs(s.graph.data).max()))
    return Dataset(cfg, train, test, r)


def _sample_line(sample: GraphSample, split: str) -> dict:
    line = {
        "split": split,
        "n": sample.n,
        "topology": sample.topology,
        "weights": sample.graph.ravel().tolist(),
    }
    if sample.diameter is not None:
        line["diameter"] = sample.diameter
    if sample.ecc is not None:
        line["ecc"] = sample.ecc.tolist()
    return line


def write_dataset(ds: Dataset, path) -> None:
    cfg = ds.config
    header = {
        "format": DATASET_FORMAT,
        "indexing": "0-based",
        "seed": cfg.seed,
        "sizes": list(cfg.sizes),
        "train_per_size": cfg.train_per_size,
        "test_per_size": cfg.test_per_size,
        "tasks": list(cfg.tasks),
        "weight_sigma": cfg.weight_sigma,
        "symmetric": cfg.symmetric,
        "norm": "linf",
        "R": ds.r_bound,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for sample in ds.train:
            fh.write(json.dumps(_sample_line(sample, "train"), sort_keys=True) + "\n")
        for sample in ds.test:
            fh.write(json.dumps(_sample_line(sample, "test"), sort_keys=True) + "\n")


def read_dataset(path) -> Dataset:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"empty dataset file: {path}")
    header = json.loads(lines[0])
    if header.get("format") != DATASET_FORMAT:
        raise ValueError(f"unsupported dataset format {header.get('format')!r}")
    cfg = DatasetConfig(
        sizes=tuple(header["sizes"]),
        train_per_size=header["train_per_size"],
        test_per_size=header["test_per_size"],
        tasks=tuple(header["tasks"]),
        weight_sigma=header["weight_sigma"],
        symmetric=header["symmetric"],
        seed=header["seed"],
    )
    train: list[GraphSample] = []
    test: list[GraphSample] = []
    for ln in lines[1:]:
        d = json.loads(ln)
        n = int(d["n"])
        sample = GraphSample(
            DenseTensor(2, n, np.asarray(d["weights"])),
            d["topology"],
            d.get("diameter"),
            np.asarray(d["ecc"], dtype=np.float64) if "ecc" in d else None,
        )
        (train if d["split"] == "train" else test).append(sample)
    return Dataset(cfg, train, test, float(header.get("R", 0.0)))


@dataclass(frozen=True)
class EditCosts:
    node_add: float = 1.0

    def __post_init__(self) -> None:
        if self.node_add <= 0:
            raise ValueError("node addition cost must be positive")


def _pad_to(g: DenseTensor, n: int) -> DenseTensor:
    if g.n == n:
        return g
    data = np.zeros((n,) * g.order)
    data[tuple(slice(0, g.n) for _ in range(g.order))] = g.data
    return DenseTensor(g.order, n, data)


def _min_l1_over_relabelings(a: DenseTensor, b: DenseTensor) -> float:
    best = math.inf
    for perm in itertools.permutations(range(b.n)):
        moved = permute(b, Permutation(np.asarray(perm)))
        best = min(best, float(np.abs(a.data - moved.data).sum()))
    return best


def edit_distance(g1: DenseTensor, g2: DenseTensor, costs: EditCosts = EditCosts()) -> float:
    """Exact edit distance: entry edits cost their absolute change (every
    tensor entry counts as an edge slot), node additions cost costs.node_add
    each and embed the smaller tensor with zeros on all new-node tuples."""
    if g1.order != g2.order:
        raise ValueError("order mismatch")
    if g1.order < 1:
        raise ValueError("edit distance needs order >= 1")
    if max(g1.n, g2.n) > EDIT_MAX_NODES:
        raise ValueError(
            f"exact edit distance infeasible, n too large (max {EDIT_MAX_NODES})"
        )
    small, large = (g1, g2) if g1.n <= g2.n else (g2, g1)
    base = costs.node_add * (large.n - small.n)
    return base + _min_l1_over_relabelings(_pad_to(small, large.n), large)


def is_isomorphic(g1: DenseTensor, g2: DenseTensor, tol: float = 1e-9) -> Permutation | None:
    """A relabeling with ||g1 - sigma * g2||_inf <= tol, or None."""
    if g1.order != g2.order:
        raise ValueError("order mismatch")
    if g1.n != g2.n:
        return None
    if g1.n > EDIT_MAX_NODES:
        raise ValueError(f"isomorphism search infeasible, n too large (max {EDIT_MAX_NODES})")
    for perm in itertools.permutations(range(g1.n)):
        sigma = Permutation(np.asarray(perm))
        if np.abs(g1.data - permute(g2, sigma).data).max() <= tol:
            return sigma
    return None
