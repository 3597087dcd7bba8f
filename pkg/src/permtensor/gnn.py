"""One-hidden-layer invariant and equivariant tensor networks.

A model with S channels computes

    f(G) = sum_s readout_s[ rho(feature_s[G] + bias_s) ] + b

where feature_s is an EquivariantMap from the input order k0 to a channel
order k_s, bias_s an EquivariantBias of order k_s, rho a pointwise
non-linearity, readout_s an InvariantMap (scalar output) or an
EquivariantMap to order 1 (vector output), and b a single scalar added to
the output (to every coordinate in the vector case).

The backward pass is derived by hand through the single non-linearity; both
forward and backward run batched over graphs that share a node count, with
channels of equal order fused into stacked gathers and BLAS contractions.
Tensorized channels (products of activated factors) are evaluation objects
only and have no flat parameter layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .equilinear import (
    EquivariantBias,
    EquivariantMap,
    InvariantMap,
    apply_equivariant,
    apply_invariant,
    materialize_bias,
    pattern_tensor,
)
from .partitions import bell, enumerate_partitions
from .tensor import Activation, DenseTensor, apply_pointwise, kron, resolve_activation

MODEL_FORMAT = "permtensor-model-v1"
BASIS_TAG = "exact-pattern-v1"

INIT_REFERENCE_N = 5
# Fan-in used by the scaled initializers, counted at this reference node count.

MODES = ("invariant", "equivariant")


@dataclass(frozen=True, eq=False)
class Channel:
    feature: EquivariantMap
    bias: EquivariantBias
    readout: InvariantMap | EquivariantMap

    def __post_init__(self) -> None:
        ks = self.feature.out_order
        if self.bias.order != ks:
            raise ValueError("channel bias order must match the feature output order")
        if self.readout.in_order != ks:
            raise ValueError("channel readout input order must match the feature output order")
        if isinstance(self.readout, EquivariantMap) and self.readout.out_order != 1:
            raise ValueError("equivariant readouts must produce order-1 output")


@dataclass(frozen=True, eq=False)
class TensorizedChannel:
    """Product channel: kron of activated factors, then one readout."""

    factors: tuple[tuple[EquivariantMap, EquivariantBias], ...]
    readout: InvariantMap | EquivariantMap

    def __post_init__(self) -> None:
        if not self.factors:
            raise ValueError("tensorized channel needs at least one factor")
        total = 0
        for fmap, fbias in self.factors:
            if fbias.order != fmap.out_order:
                raise ValueError("factor bias order must match the factor output order")
            total += fmap.out_order
        if self.readout.in_order != total:
            raise ValueError(
                "readout input order must equal the summed factor output orders"
            )
        if isinstance(self.readout, EquivariantMap) and self.readout.out_order != 1:
            raise ValueError("equivariant readouts must produce order-1 output")


@dataclass(frozen=True, eq=False)
class GnnModel:
    input_order: int
    mode: str
    activation: str
    channels: tuple
    output_bias: float

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        resolve_activation(self.activation)
        for ch in self.channels:
            fmaps = ch.factors if isinstance(ch, TensorizedChannel) else ((ch.feature, ch.bias),)
            for fmap, _ in fmaps:
                if fmap.in_order != self.input_order:
                    raise ValueError("every feature map must consume the input order")
            want_invariant = self.mode == "invariant"
            if want_invariant != isinstance(ch.readout, InvariantMap):
                raise ValueError(f"readout type does not match mode {self.mode!r}")
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "output_bias", float(self.output_bias))


@dataclass(frozen=True)
class ModelSpec:
    """Structure of a plain-channel model: enough to size a parameter vector."""

    input_order: int
    mode: str
    activation: str
    channel_orders: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        object.__setattr__(self, "channel_orders", tuple(self.channel_orders))


def param_slices(spec: ModelSpec) -> tuple[list[tuple[slice, slice, slice]], int, int]:
    """Per-channel (feature, bias, readout) slices, bias index, total length.

    Flat layout: for each channel in order, feature coeffs, bias coeffs,
    readout coeffs; then the single output bias scalar.
    """
    slices = []
    off = 0
    for ks in spec.channel_orders:
        fl = bell(spec.input_order + ks)
        bl = bell(ks)
        hl = bell(ks) if spec.mode == "invariant" else bell(ks + 1)
        slices.append(
            (slice(off, off + fl), slice(off + fl, off + fl + bl),
             slice(off + fl + bl, off + fl + bl + hl))
        )
        off += fl + bl + hl
    return slices, off, off + 1


def param_count(spec: ModelSpec) -> int:
    return param_slices(spec)[2]


def model_spec(model: GnnModel) -> ModelSpec:
    orders = []
    for ch in model.channels:
        if isinstance(ch, TensorizedChannel):
            raise ValueError("tensorized channels have no flat parameter layout")
        orders.append(ch.feature.out_order)
    return ModelSpec(model.input_order, model.mode, model.activation, tuple(orders))


def flatten_params(model: GnnModel) -> np.ndarray:
    spec = model_spec(model)
    slices, _, total = param_slices(spec)
    vec = np.empty(total)
    for ch, (fs, bs, hs) in zip(model.channels, slices):
        vec[fs] = ch.feature.coeffs
        vec[bs] = ch.bias.coeffs
        vec[hs] = ch.readout.coeffs
    vec[-1] = model.output_bias
    return vec


def unflatten_params(spec: ModelSpec, vec: np.ndarray) -> GnnModel:
    vec = np.asarray(vec, dtype=np.float64).reshape(-1)
    slices, bias_at, total = param_slices(spec)
    if vec.size != total:
        raise ValueError(f"parameter vector length mismatch: expected {total}, got {vec.size}")
    channels = []
    for ks, (fs, bs, hs) in zip(spec.channel_orders, slices):
        feature = EquivariantMap(spec.input_order, ks, vec[fs])
        fbias = EquivariantBias(ks, vec[bs])
        if spec.mode == "invariant":
            readout: InvariantMap | EquivariantMap = InvariantMap(ks, vec[hs])
        else:
            readout = EquivariantMap(ks, 1, vec[hs])
        channels.append(Channel(feature, fbias, readout))
    return GnnModel(spec.input_order, spec.mode, spec.activation, tuple(channels), vec[bias_at])


def init_params(
    spec: ModelSpec, seed, scheme: str = "uniform_scaled"
) -> GnnModel:
    """Seeded parameter draw; identical (spec, seed, scheme) gives identical models.

    Scale per coordinate is 1/fan with fan the number of input-tuple
    contributions per output entry at the reference node count: fan =
    n_ref^in_order for the maps and 1 for additive bias coefficients.
    The pattern sums feeding each coefficient are sums of same-sign entries,
    so they grow linearly in fan; 1/fan keeps pre-activations in the
    responsive range of the activation across node counts.
    """
    slices, bias_at, total = param_slices(spec)
    scales = np.ones(total)
    for ks, (fs, bs, hs) in zip(spec.channel_orders, slices):
        scales[fs] = float(INIT_REFERENCE_N) ** (-spec.input_order)
        scales[hs] = float(INIT_REFERENCE_N) ** (-ks)
    rng = np.random.default_rng(seed)
    if scheme == "uniform_scaled":
        vec = rng.uniform(-1.0, 1.0, total) * scales
    elif scheme == "gaussian":
        vec = rng.standard_normal(total) * scales
    else:
        raise ValueError(f"unknown init scheme {scheme!r}")
    return unflatten_params(spec, vec)


def _channel_groups(model: GnnModel) -> list[tuple[int, list[int]]]:
    groups: dict[int, list[int]] = {}
    for i, ch in enumerate(model.channels):
        groups.setdefault(ch.feature.out_order, []).append(i)
    return sorted(groups.items())


@dataclass
class _ForwardCache:
    model: GnnModel
    gs: np.ndarray  # (B, n^k0)
    n: int
    act: Activation
    groups: list  # (ks, idxs, a, z_or_none, wh)


def _forward_cached(
    model: GnnModel, gs: np.ndarray, n: int, keep: bool = False
) -> tuple[np.ndarray, _ForwardCache | None]:
    """Batched forward on raveled inputs gs of shape (B, n^k0)."""
    act = resolve_activation(model.activation)
    k0 = model.input_order
    batch = gs.shape[0]
    invariant = model.mode == "invariant"
    out = np.zeros(batch) if invariant else np.zeros((batch, n))
    groups = []
    for ks, idxs in _channel_groups(model):
        sg = len(idxs)
        nk = n**ks
        pf = pattern_tensor(ks + k0, n).reshape(nk, n**k0)
        fco = np.stack([model.channels[i].feature.coeffs for i in idxs])
        z = (gs @ fco[:, pf].reshape(sg * nk, -1).T).reshape(batch, sg, nk)
        pb = pattern_tensor(ks, n).reshape(-1)
        bco = np.stack([model.channels[i].bias.coeffs for i in idxs])
        z += bco[:, pb][None, :, :]
        a = act.fn(z)
        hco = np.stack([model.channels[i].readout.coeffs for i in idxs])
        if invariant:
            wh = hco[:, pb]  # (sg, nk)
            out += a.reshape(batch, -1) @ wh.reshape(-1)
        else:
            ph = pattern_tensor(ks + 1, n).reshape(n, nk)
            wh = hco[:, ph]  # (sg, n, nk)
            out += np.matmul(a.transpose(1, 0, 2), wh.transpose(0, 2, 1)).sum(axis=0)
        groups.append((ks, idxs, a, z if act.needs_z else None, wh))
    out += model.output_bias
    if not keep:
        return out, None
    return out, _ForwardCache(model, gs, n, act, groups)


def _backward(cache: _ForwardCache, upstream: np.ndarray) -> np.ndarray:
    """Gradient of sum_b <f(G_b), upstream_b> over the flat parameter vector."""
    model, gs, n, act = cache.model, cache.gs, cache.n, cache.act
    k0 = model.input_order
    invariant = model.mode == "invariant"
    spec = model_spec(model)
    slices, bias_at, total = param_slices(spec)
    grad = np.zeros(total)
    u = np.asarray(upstream, dtype=np.float64)
    grad[bias_at] = u.sum()
    for ks, idxs, a, z, wh in cache.groups:
        nk = n**ks
        if invariant:
            da = u[:, None, None] * wh[None, :, :]
            gh = np.tensordot(u, a, axes=([0], [0]))  # (sg, nk)
        else:
            da = np.matmul(u, wh).transpose(1, 0, 2)  # (B, sg, nk)
            gh = np.matmul(u.T, a.transpose(1, 0, 2))  # (sg, n, nk)
        dz = da * act.deriv(z, a)
        gb = dz.sum(axis=0)  # (sg, nk)
        gf = np.matmul(dz.transpose(1, 2, 0), gs)  # (sg, nk, n^k0)
        pfr = pattern_tensor(ks + k0, n).reshape(-1)
        pbr = pattern_tensor(ks, n).reshape(-1)
        phr = pbr if invariant else pattern_tensor(ks + 1, n).reshape(-1)
        for gi, ci in enumerate(idxs):
            fs, bs, hs = slices[ci]
            grad[fs] = np.bincount(pfr, weights=gf[gi].reshape(-1), minlength=bell(ks + k0))
            grad[bs] = np.bincount(pbr, weights=gb[gi], minlength=bell(ks))
            grad[hs] = np.bincount(
                phr, weights=gh[gi].reshape(-1),
                minlength=bell(ks) if invariant else bell(ks + 1),
            )
    return grad


def forward_many(model: GnnModel, graphs: np.ndarray, n: int) -> np.ndarray:
    """Batched forward; graphs is (B,) + (n,)*k0 or (B, n^k0)."""
    gs = np.asarray(graphs, dtype=np.float64).reshape(graphs.shape[0], -1)
    return _forward_cached(model, gs, n)[0]


def forward(model: GnnModel, g: DenseTensor) -> float | DenseTensor:
    """Model output on one graph: a float or an order-1 DenseTensor."""
    if g.order != model.input_order:
        raise ValueError(
            f"input order mismatch: model expects {model.input_order}, tensor has {g.order}"
        )
    vals = _forward_cached(model, g.ravel()[None, :], g.n)[0]
    if model.mode == "invariant":
        return float(vals[0])
    return DenseTensor(1, g.n, vals[0])


def gradient(model: GnnModel, g: DenseTensor, upstream) -> np.ndarray:
    """d<f(g), upstream>/d(theta) in flat layout (see param_slices)."""
    if g.order != model.input_order:
        raise ValueError(
            f"input order mismatch: model expects {model.input_order}, tensor has {g.order}"
        )
    _, cache = _forward_cached(model, g.ravel()[None, :], g.n, keep=True)
    if model.mode == "invariant":
        u = np.asarray([float(upstream)])
    else:
        udata = upstream.data if isinstance(upstream, DenseTensor) else np.asarray(upstream)
        u = np.asarray(udata, dtype=np.float64).reshape(1, g.n)
    return _backward(cache, u)


def forward_tensorized(model: GnnModel, g: DenseTensor) -> float | DenseTensor:
    """Forward pass accepting TensorizedChannel entries; plain channels are
    treated as single-factor products, so it reduces to forward on those."""
    if g.order != model.input_order:
        raise ValueError(
            f"input order mismatch: model expects {model.input_order}, tensor has {g.order}"
        )
    act = resolve_activation(model.activation)
    invariant = model.mode == "invariant"
    total = model.output_bias if invariant else np.full(g.n, model.output_bias)
    for ch in model.channels:
        factors = (
            ch.factors if isinstance(ch, TensorizedChannel) else ((ch.feature, ch.bias),)
        )
        feat: DenseTensor | None = None
        for fmap, fbias in factors:
            z = apply_equivariant(fmap, g)
            z = DenseTensor(z.order, z.n, z.data + materialize_bias(fbias, g.n).data)
            a = apply_pointwise(z, act)
            feat = a if feat is None else kron(feat, a)
        assert feat is not None
        if invariant:
            total += apply_invariant(ch.readout, feat)
        else:
            total = total + apply_equivariant(ch.readout, feat).data
    if invariant:
        return float(total)
    return DenseTensor(1, g.n, total)


def _map_to_json(m) -> dict:
    return m.to_json_dict()


def _readout_from_json(d: dict, mode: str):
    if mode == "invariant":
        return InvariantMap.from_json_dict(d)
    return EquivariantMap.from_json_dict(d)


def model_to_json_dict(model: GnnModel) -> dict:
    arities: set[int] = set()
    channels = []
    for ch in model.channels:
        if isinstance(ch, TensorizedChannel):
            entry = {
                "factors": [
                    {"feature": f.to_json_dict(), "bias": b.to_json_dict()}
                    for f, b in ch.factors
                ],
                "readout": _map_to_json(ch.readout),
            }
            for f, b in ch.factors:
                arities.add(f.in_order + f.out_order)
                arities.add(b.order)
        else:
            entry = {
                "feature": ch.feature.to_json_dict(),
                "bias": ch.bias.to_json_dict(),
                "readout": _map_to_json(ch.readout),
            }
            arities.add(ch.feature.in_order + ch.feature.out_order)
            arities.add(ch.bias.order)
        ro = ch.readout
        arities.add(ro.in_order if isinstance(ro, InvariantMap) else ro.in_order + ro.out_order)
        channels.append(entry)
    return {
        "format": MODEL_FORMAT,
        "basis": BASIS_TAG,
        "indexing": "0-based",
        "mode": model.mode,
        "activation": model.activation,
        "input_order": model.input_order,
        "bias": model.output_bias,
        "channels": channels,
        "partition_order": {
            str(m): [p.rgs_string() for p in enumerate_partitions(m)]
            for m in sorted(arities)
        },
    }


def model_from_json_dict(d: dict) -> GnnModel:
    if d.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format {d.get('format')!r}")
    if d.get("basis") != BASIS_TAG:
        raise ValueError(f"unsupported basis tag {d.get('basis')!r}")
    mode = d["mode"]
    channels: list = []
    for entry in d["channels"]:
        readout = _readout_from_json(entry["readout"], mode)
        if "factors" in entry:
            factors = tuple(
                (
                    EquivariantMap.from_json_dict(f["feature"]),
                    EquivariantBias.from_json_dict(f["bias"]),
                )
                for f in entry["factors"]
            )
            channels.append(TensorizedChannel(factors, readout))
        else:
            channels.append(
                Channel(
                    EquivariantMap.from_json_dict(entry["feature"]),
                    EquivariantBias.from_json_dict(entry["bias"]),
                    readout,
                )
            )
    return GnnModel(
        int(d["input_order"]), mode, d["activation"], tuple(channels), float(d["bias"])
    )


def save_model(model: GnnModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_json_dict(model), sort_keys=True) + "\n")


def load_model(path) -> GnnModel:
    return model_from_json_dict(json.loads(Path(path).read_text()))
