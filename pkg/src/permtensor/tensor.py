"""Dense order-k tensors with a shared index range and the relabeling action.

All tensors are stored row-major in 64-bit floats.  The node-relabeling
action is (sigma * G)[sigma(i1), ..., sigma(ik)] = G[i1, ..., ik]; for
order 2 this is P G P^T with P the permutation matrix of sigma.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .partitions import ARITY_CAP


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """Order-k tensor with every axis of length n; k >= 0, n >= 1."""

    order: int
    n: int
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.order < 0:
            raise ValueError("order must be non-negative")
        if self.n < 1:
            raise ValueError("side length must be at least 1")
        shape = (self.n,) * self.order
        arr = np.array(self.data, dtype=np.float64)
        if arr.size != self.n**self.order:
            raise ValueError(
                f"data has {arr.size} entries, expected n^k = {self.n**self.order}"
            )
        arr = arr.reshape(shape)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, arr, n: int | None = None) -> "DenseTensor":
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim == 0:
            return cls(0, n if n is not None else 1, a)
        return cls(a.ndim, a.shape[0], a)

    @classmethod
    def zeros(cls, order: int, n: int) -> "DenseTensor":
        return cls(order, n, np.zeros((n,) * order))

    def item(self) -> float:
        if self.order != 0:
            raise ValueError("item() is only defined for order-0 tensors")
        return float(self.data)

    def ravel(self) -> np.ndarray:
        return self.data.reshape(-1)

    def to_json_dict(self) -> dict:
        return {"order": self.order, "n": self.n, "data": self.ravel().tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "DenseTensor":
        return cls(int(d["order"]), int(d["n"]), np.asarray(d["data"], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class Permutation:
    """A bijection on {0, ..., n-1}; mapping[i] = sigma(i)."""

    mapping: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.mapping, dtype=np.int64).reshape(-1)
        n = arr.size
        if n < 1 or not np.array_equal(np.sort(arr), np.arange(n)):
            raise ValueError("mapping must be a bijection on 0..n-1")
        arr.setflags(write=False)
        object.__setattr__(self, "mapping", arr)

    @property
    def n(self) -> int:
        return self.mapping.size

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(rng.permutation(n))

    def inverse(self) -> "Permutation":
        inv = np.empty(self.n, dtype=np.int64)
        inv[self.mapping] = np.arange(self.n)
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self.compose(other))(i) = self(other(i))."""
        if self.n != other.n:
            raise ValueError("permutation size mismatch")
        return Permutation(self.mapping[other.mapping])

    def matrix(self) -> np.ndarray:
        p = np.zeros((self.n, self.n))
        p[self.mapping, np.arange(self.n)] = 1.0
        return p


def permute(g: DenseTensor, sigma: Permutation) -> DenseTensor:
    """Relabeling action: out[sigma(i1),...,sigma(ik)] = g[i1,...,ik]."""
    if g.order == 0:
        return g
    if sigma.n != g.n:
        raise ValueError("permutation size mismatch")
    inv = sigma.inverse().mapping
    return DenseTensor(g.order, g.n, g.data[np.ix_(*([inv] * g.order))])


def kron(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    """Tensor product: out[i..., j...] = a[i...] * b[j...]."""
    if a.order + b.order > ARITY_CAP:
        raise ValueError(
            f"combined order {a.order + b.order} exceeds arity cap {ARITY_CAP}"
        )
    if a.order > 0 and b.order > 0 and a.n != b.n:
        raise ValueError("side length mismatch")
    n = a.n if a.order > 0 else b.n
    return DenseTensor(a.order + b.order, n, np.multiply.outer(a.data, b.data))


def hadamard(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    if a.order != b.order or a.n != b.n:
        raise ValueError("hadamard requires matching order and side length")
    return DenseTensor(a.order, a.n, a.data * b.data)


class Norms(NamedTuple):
    l1: float
    linf: float


def norms(g: DenseTensor) -> Norms:
    absd = np.abs(g.data).reshape(-1)
    # summing in sorted order makes l1 exactly invariant under relabeling
    return Norms(float(np.sort(absd).sum()), float(absd.max()))


@dataclass(frozen=True)
class Activation:
    """Pointwise non-linearity with a derivative usable from cached values.

    deriv(z, a) evaluates rho'(z) where a = rho(z); activations with
    needs_z=False derive it from a alone, so callers may pass z=None.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray | None, np.ndarray], np.ndarray]
    needs_z: bool = False


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # Two-branch form, never exponentiates a positive argument.
    x = np.asarray(x, dtype=np.float64)
    shape = x.shape
    flat = np.atleast_1d(x)
    out = np.empty_like(flat)
    pos = flat >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-flat[pos]))
    ex = np.exp(flat[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out.reshape(shape)


ACTIVATIONS: dict[str, Activation] = {
    "sigmoid": Activation("sigmoid", _sigmoid, lambda z, a: a * (1.0 - a)),
    "cos": Activation(
        "cos",
        lambda x: np.cos(np.asarray(x, dtype=np.float64)),
        lambda z, a: -np.sin(z),
        needs_z=True,
    ),
    "tanh": Activation(
        "tanh",
        lambda x: np.tanh(np.asarray(x, dtype=np.float64)),
        lambda z, a: 1.0 - a * a,
    ),
    "relu": Activation(
        "relu",
        lambda x: np.maximum(np.asarray(x, dtype=np.float64), 0.0),
        # rho'(0) = 0 by convention; a > 0 iff z > 0 for relu.
        lambda z, a: (a > 0).astype(np.float64),
    ),
}


def resolve_activation(rho: str | Activation) -> Activation:
    if isinstance(rho, Activation):
        return rho
    act = ACTIVATIONS.get(rho)
    if act is None:
        raise ValueError(
            f"unknown activation {rho!r}; choose one of {sorted(ACTIVATIONS)}"
        )
    return act


def apply_pointwise(g: DenseTensor, rho: str | Activation) -> DenseTensor:
    act = resolve_activation(rho)
    return DenseTensor(g.order, g.n, act.fn(g.data))
