"""Linear maps between tensor spaces that commute with node relabeling.

A linear map taking order-k tensors to order-l tensors commutes with the
simultaneous relabeling action exactly when its (out, in) coefficient tensor
is constant on equality patterns of the combined (l+k)-tuple, so the space
has one basis element per set partition of l+k positions: b(l+k) in total,
independent of n.  The basis used here and tagged in files as
"exact-pattern-v1" assigns to each partition the 0/1 tensor whose entry is 1
iff the combined tuple's equality pattern equals that partition exactly
(equal within blocks AND distinct across blocks).  Supports are disjoint, so
re-expressing any pattern-constant tensor in this basis is a pointwise read.

Conventions frozen here:
  * combined tuples list output positions first (axes 0..l-1), then input
    positions (axes l..l+k-1);
  * coefficients follow the canonical partition order of partitions.py;
  * when n is smaller than a partition's block count no tuple has that exact
    pattern and the coefficient contributes zero.

Application never materializes the b(l+k) basis tensors.  A single integer
pattern-index tensor per (arity, n) is computed once, cached, and shared by
every map of that signature; applying a map is then one gather of its
coefficient vector plus one dense contraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .partitions import _check_arity, _partitions_tuple, bell
from .tensor import DenseTensor

ELEMENT_BUDGET = 5_000_000
# Guards n^(k+l); past this the dense combined-index tensors stop fitting
# comfortably in memory.

_PATTERN_CACHE: dict[tuple[int, int], np.ndarray] = {}


@lru_cache(maxsize=None)
def _enumeration_keys(m: int) -> np.ndarray:
    """Base-m integer keys of the canonical RGS enumeration (ascending)."""
    base = max(m, 1)
    keys = []
    for p in _partitions_tuple(m):
        key = 0
        for digit in p.to_rgs():
            key = key * base + digit
        keys.append(key)
    arr = np.asarray(keys, dtype=np.int64)
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise AssertionError("enumeration keys must be strictly increasing")
    return arr


def _compute_pattern_indices(m: int, n: int) -> np.ndarray:
    """Pattern index of every tuple in [n]^m, row-major, via vectorized RGS."""
    size = n**m
    flat = np.arange(size, dtype=np.int64)
    labels = np.zeros((m, size), dtype=np.int8)
    max_label = np.zeros(size, dtype=np.int8)
    for j in range(1, m):
        xj = (flat // (n ** (m - 1 - j))) % n
        lab = np.full(size, -1, dtype=np.int8)
        for i in range(j):
            xi = (flat // (n ** (m - 1 - i))) % n
            hit = (lab < 0) & (xi == xj)
            lab[hit] = labels[i, hit]
        fresh = lab < 0
        lab[fresh] = max_label[fresh] + 1
        np.maximum(max_label, lab, out=max_label)
        labels[j] = lab
    base = max(m, 1)
    keys = np.zeros(size, dtype=np.int64)
    for j in range(m):
        keys = keys * base + labels[j]
    return np.searchsorted(_enumeration_keys(m), keys)


def pattern_tensor(m: int, n: int, budget: int | None = None) -> np.ndarray:
    """Read-only int64 tensor of shape (n,)*m holding each tuple's pattern index.

    Cached per (m, n); this is the one shared structure behind every map
    application of that signature.
    """
    _check_arity(m)
    if n < 1:
        raise ValueError("side length must be at least 1")
    cached = _PATTERN_CACHE.get((m, n))
    if cached is not None:
        return cached
    limit = ELEMENT_BUDGET if budget is None else budget
    size = n**m
    if size > limit:
        raise ValueError(f"tensor budget exceeded: n^m = {size} > {limit}")
    if m == 0:
        out = np.zeros((), dtype=np.int64)
    else:
        out = _compute_pattern_indices(m, n).reshape((n,) * m)
    out.setflags(write=False)
    _PATTERN_CACHE[(m, n)] = out
    return out


def _coeff_array(coeffs, m: int) -> np.ndarray:
    arr = np.array(coeffs, dtype=np.float64).reshape(-1)
    expected = bell(m)
    if arr.size != expected:
        raise ValueError(
            f"coefficient vector must have length bell({m}) = {expected}, got {arr.size}"
        )
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EquivariantMap:
    """Linear relabeling-equivariant map, order in_order -> order out_order.

    coeffs has length bell(in_order + out_order), one entry per partition of
    the combined tuple (output positions first) in canonical order.
    """

    in_order: int
    out_order: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        if self.in_order < 0 or self.out_order < 0:
            raise ValueError("orders must be non-negative")
        _check_arity(self.in_order + self.out_order)
        object.__setattr__(
            self, "coeffs", _coeff_array(self.coeffs, self.in_order + self.out_order)
        )

    def to_json_dict(self) -> dict:
        return {
            "in_order": self.in_order,
            "out_order": self.out_order,
            "coeffs": self.coeffs.tolist(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "EquivariantMap":
        return cls(int(d["in_order"]), int(d["out_order"]), d["coeffs"])


@dataclass(frozen=True, eq=False)
class InvariantMap:
    """Linear relabeling-invariant functional on order-in_order tensors."""

    in_order: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        if self.in_order < 0:
            raise ValueError("order must be non-negative")
        _check_arity(self.in_order)
        object.__setattr__(self, "coeffs", _coeff_array(self.coeffs, self.in_order))

    def to_json_dict(self) -> dict:
        return {"in_order": self.in_order, "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "InvariantMap":
        return cls(int(d["in_order"]), d["coeffs"])


@dataclass(frozen=True, eq=False)
class EquivariantBias:
    """Relabeling-invariant order-k tensor, one coefficient per pattern."""

    order: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        if self.order < 0:
            raise ValueError("order must be non-negative")
        _check_arity(self.order)
        object.__setattr__(self, "coeffs", _coeff_array(self.coeffs, self.order))

    def to_json_dict(self) -> dict:
        return {"order": self.order, "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "EquivariantBias":
        return cls(int(d["order"]), d["coeffs"])


def apply_equivariant(
    fmap: EquivariantMap, g: DenseTensor, budget: int | None = None
) -> DenseTensor:
    """out[o] = sum_i coeffs[pattern_index(o ++ i)] * g[i]."""
    if g.order != fmap.in_order:
        raise ValueError(
            f"input order mismatch: map expects {fmap.in_order}, tensor has {g.order}"
        )
    k, l = fmap.in_order, fmap.out_order
    w = fmap.coeffs[pattern_tensor(l + k, g.n, budget)]
    if k == 0:
        out = w * g.data
    else:
        out = np.tensordot(w, g.data, axes=(tuple(range(l, l + k)), tuple(range(k))))
    return DenseTensor(l, g.n, out)


def apply_invariant(hmap: InvariantMap, g: DenseTensor, budget: int | None = None) -> float:
    """value = sum_i coeffs[pattern_index(i)] * g[i]."""
    if g.order != hmap.in_order:
        raise ValueError(
            f"input order mismatch: map expects {hmap.in_order}, tensor has {g.order}"
        )
    w = hmap.coeffs[pattern_tensor(hmap.in_order, g.n, budget)]
    return float((w * g.data).sum())


def adjoint_equivariant(
    fmap: EquivariantMap, u: DenseTensor, budget: int | None = None
) -> DenseTensor:
    """Transpose map: <apply_equivariant(F, g), u> == <g, adjoint_equivariant(F, u)>."""
    if u.order != fmap.out_order:
        raise ValueError(
            f"output order mismatch: map produces {fmap.out_order}, tensor has {u.order}"
        )
    k, l = fmap.in_order, fmap.out_order
    w = fmap.coeffs[pattern_tensor(l + k, u.n, budget)]
    if l == 0:
        out = w * u.data
    else:
        out = np.tensordot(w, u.data, axes=(tuple(range(l)), tuple(range(l))))
    return DenseTensor(k, u.n, out)


def materialize_bias(bias: EquivariantBias, n: int, budget: int | None = None) -> DenseTensor:
    return DenseTensor(bias.order, n, bias.coeffs[pattern_tensor(bias.order, n, budget)])


def materialize_basis(
    k: int, l: int, n: int, budget: int | None = None
) -> list[DenseTensor]:
    """The b(k+l) exact-pattern basis tensors at a concrete n (diagnostics only).

    Entry [o ++ i] of basis element p is 1 iff that combined tuple's equality
    pattern is exactly partition p.  Supports are disjoint and the sum over
    all elements is the all-ones tensor.
    """
    p = pattern_tensor(k + l, n, budget)
    return [
        DenseTensor(k + l, n, (p == i).astype(np.float64)) for i in range(bell(k + l))
    ]
