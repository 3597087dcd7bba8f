"""MSE training with ADAM on the synthetic graph tasks.

All randomness flows from one seed through named sub-streams (init, per-epoch
shuffle); batches group samples by node count so the batched kernels see one
n at a time, and batch order within an epoch is a seeded shuffle.  Reruns
with identical config and dataset reproduce metrics and model bit-for-bit.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gnn import (
    GnnModel,
    ModelSpec,
    _backward,
    _forward_cached,
    flatten_params,
    init_params,
    unflatten_params,
)
from .graphs import Dataset, GraphSample

_STREAM_INIT, _STREAM_SHUFFLE = 2, 3

METRIC_COLUMNS = ("epoch", "train_mse", "test_mse", "test_mse_n5", "test_mse_n10", "wall_ms")


@dataclass(frozen=True)
class TrainConfig:
    task: str = "diameter"  # "diameter" (scalar) or "eccentricity" (vector)
    channel_order: int = 1
    width: int = 8
    epochs: int = 150
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    activation: str = "sigmoid"
    init_scheme: str = "uniform_scaled"
    seed: int = 0

    @property
    def mode(self) -> str:
        if self.task == "diameter":
            return "invariant"
        if self.task == "eccentricity":
            return "equivariant"
        raise ValueError(f"unknown task {self.task!r}")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size), 0)


def adam_step(
    params: np.ndarray, grad: np.ndarray, state: AdamState, config: TrainConfig
) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected ADAM update; functional, returns fresh arrays."""
    t = state.t + 1
    m = config.beta1 * state.m + (1.0 - config.beta1) * grad
    v = config.beta2 * state.v + (1.0 - config.beta2) * grad * grad
    m_hat = m / (1.0 - config.beta1**t)
    v_hat = v / (1.0 - config.beta2**t)
    new_params = params - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
    return new_params, AdamState(m, v, t)


def _targets(samples: list[GraphSample], task: str) -> np.ndarray:
    if task == "diameter":
        vals = [s.diameter for s in samples]
        if any(v is None for v in vals):
            raise ValueError("dataset lacks diameter targets")
        return np.asarray(vals, dtype=np.float64)
    if task == "eccentricity":
        if any(s.ecc is None for s in samples):
            raise ValueError("dataset lacks eccentricity targets")
        return np.stack([s.ecc for s in samples])
    raise ValueError(f"unknown task {task!r}")


def _group_by_n(samples: list[GraphSample], task: str) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """n -> (stacked raveled graphs, stacked targets), insertion by sorted n."""
    byn: dict[int, list[GraphSample]] = {}
    for s in samples:
        byn.setdefault(s.n, []).append(s)
    out = {}
    for n in sorted(byn):
        group = byn[n]
        gs = np.stack([s.graph.ravel() for s in group])
        out[n] = (gs, _targets(group, task))
    return out


def _batch_loss_grad(
    model: GnnModel, gs: np.ndarray, ys: np.ndarray, n: int, task: str
) -> tuple[float, np.ndarray]:
    vals, cache = _forward_cached(model, gs, n, keep=True)
    resid = vals - ys
    b = gs.shape[0]
    if task == "diameter":
        loss = float((resid**2).mean())
        upstream = 2.0 * resid / b
    else:
        # per-coordinate normalization keeps vector losses comparable across n
        loss = float((resid**2).sum() / (b * n))
        upstream = 2.0 * resid / (b * n)
    return loss, _backward(cache, upstream)


def mse_loss(
    model: GnnModel, batch: list[GraphSample], task: str
) -> tuple[float, np.ndarray]:
    """Loss and flat parameter gradient on one batch sharing a node count."""
    if not batch:
        raise ValueError("empty batch")
    ns = {s.n for s in batch}
    if len(ns) > 1:
        raise ValueError("all samples in a batch must share the node count")
    n = ns.pop()
    gs = np.stack([s.graph.ravel() for s in batch])
    return _batch_loss_grad(model, gs, _targets(batch, task), n, task)


def evaluate_mse(model: GnnModel, samples: list[GraphSample], task: str) -> dict:
    """Overall and per-node-count mean squared error."""
    if not samples:
        return {"mse": float("nan"), "per_size": {}}
    total = 0.0
    count = 0
    per_size = {}
    for n, (gs, ys) in _group_by_n(samples, task).items():
        vals = _forward_cached(model, gs, n)[0]
        resid = vals - ys
        if task == "diameter":
            sq = float((resid**2).sum())
            num = gs.shape[0]
        else:
            sq = float((resid**2).sum() / n)
            num = gs.shape[0]
        per_size[n] = sq / num
        total += sq
        count += num
    return {"mse": total / count, "per_size": per_size}


def fit(config: TrainConfig, dataset: Dataset) -> tuple[GnnModel, list[dict]]:
    """Train a fresh model; returns it with one metrics row per epoch."""
    if not dataset.train:
        raise ValueError("empty training split")
    task = config.task
    train_groups = _group_by_n(dataset.train, task)
    input_order = dataset.train[0].graph.order
    spec = ModelSpec(
        input_order, config.mode, config.activation,
        (config.channel_order,) * config.width,
    )
    model = init_params(spec, (config.seed, _STREAM_INIT), config.init_scheme)
    params = flatten_params(model)
    state = AdamState.zeros(params.size)

    history: list[dict] = []
    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        rng = np.random.default_rng((config.seed, _STREAM_SHUFFLE, epoch))
        batches: list[tuple[int, np.ndarray]] = []
        for n in sorted(train_groups):
            size = train_groups[n][0].shape[0]
            order = rng.permutation(size)
            for start in range(0, size, config.batch_size):
                batches.append((n, order[start : start + config.batch_size]))
        batch_order = rng.permutation(len(batches))

        sq_sum = 0.0
        seen = 0
        for bi in batch_order:
            n, idx = batches[bi]
            gs_all, ys_all = train_groups[n]
            loss, grad = _batch_loss_grad(model, gs_all[idx], ys_all[idx], n, task)
            params, state = adam_step(params, grad, state, config)
            model = unflatten_params(spec, params)
            sq_sum += loss * idx.size
            seen += idx.size

        test = evaluate_mse(model, dataset.test, task) if dataset.test else None
        wall_ms = (time.perf_counter() - t0) * 1000.0
        row = {
            "epoch": epoch,
            "train_mse": sq_sum / seen,
            "test_mse": test["mse"] if test else float("nan"),
            "test_mse_n5": test["per_size"].get(5, float("nan")) if test else float("nan"),
            "test_mse_n10": test["per_size"].get(10, float("nan")) if test else float("nan"),
            "wall_ms": wall_ms,
        }
        history.append(row)
    return model, history


def write_metrics(history: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRIC_COLUMNS)
        for row in history:
            writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in METRIC_COLUMNS])


def read_metrics(path) -> list[dict]:
    with open(path) as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            rows.append(
                {
                    "epoch": int(raw["epoch"]),
                    **{c: float(raw[c]) for c in METRIC_COLUMNS if c != "epoch"},
                }
            )
    return rows
