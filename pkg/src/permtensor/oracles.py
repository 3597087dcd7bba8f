"""Constructive oracles: operator closure, threshold networks, and the
multiset-profile separation procedure.

closure_invariant / closure_equivariant build, from two readout maps, the
single map whose action on a tensor product reproduces the product (or the
coordinatewise product) of the two original outputs.  The construction
materializes the combined coefficient tensor at a reference node count and
reads it back in the exact-pattern basis; supports are disjoint, so one
representative tuple per pattern suffices, and a residual check guards the
round trip.

separate() is a staged invariant-network search that either produces a
witness network telling two graphs apart or reports an honest failure.
check_multiset_lemma() exhaustively tests the alignment dichotomy behind
stage 3 at tiny sizes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .equilinear import (
    EquivariantMap,
    InvariantMap,
    pattern_tensor,
)
from .partitions import _partitions_tuple, bell
from .tensor import DenseTensor, Permutation, _sigmoid, permute

RESIDUAL_TOL = 1e-10

PROFILE_MAX_NODES = 5


def _representative_tuple(p) -> tuple[int, ...]:
    rep = [0] * p.arity
    for b, block in enumerate(p.blocks):
        for pos in block:
            rep[pos] = b
    return tuple(rep)


def _reexpress(w: np.ndarray, m: int, n_ref: int) -> np.ndarray:
    """Coefficients of a pattern-constant tensor in the exact-pattern basis."""
    coeffs = np.empty(bell(m))
    for i, p in enumerate(_partitions_tuple(m)):
        coeffs[i] = w[_representative_tuple(p)] if m > 0 else float(w)
    residual = np.abs(w - coeffs[pattern_tensor(m, n_ref)]).max()
    if residual > RESIDUAL_TOL:
        raise RuntimeError(
            f"re-expression residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}; "
            "the materialized operator is not pattern-constant"
        )
    return coeffs


def closure_invariant(h1: InvariantMap, h2: InvariantMap) -> InvariantMap:
    """H3 with H3[A (x) B] == H1[A] * H2[B] for all same-n tensors A, B."""
    k1, k2 = h1.in_order, h2.in_order
    m = k1 + k2
    n_ref = max(m, 1)
    w1 = h1.coeffs[pattern_tensor(k1, n_ref)]
    w2 = h2.coeffs[pattern_tensor(k2, n_ref)]
    return InvariantMap(m, _reexpress(np.multiply.outer(w1, w2), m, n_ref))


def closure_equivariant(h1: EquivariantMap, h2: EquivariantMap) -> EquivariantMap:
    """H3 with H3[A (x) B] == H1[A] . H2[B] coordinatewise (order-1 outputs)."""
    if h1.out_order != 1 or h2.out_order != 1:
        raise ValueError("closure needs order-1 outputs on both maps")
    k1, k2 = h1.in_order, h2.in_order
    m = 1 + k1 + k2
    n_ref = max(m, 1)
    w1 = h1.coeffs[pattern_tensor(1 + k1, n_ref)].reshape(n_ref, -1)
    w2 = h2.coeffs[pattern_tensor(1 + k2, n_ref)].reshape(n_ref, -1)
    # Combined weight shares the output index: w3[q, i1, i2] = w1[q,i1] w2[q,i2].
    w3 = (w1[:, :, None] * w2[:, None, :]).reshape((n_ref,) * m)
    return EquivariantMap(k1 + k2, 1, _reexpress(w3, m, n_ref))


@dataclass(frozen=True)
class ThresholdNet:
    """Invariant net summing sigmoid(lam * (entry - tau)) over all entries."""

    tau: float
    lam: float

    def value(self, g: DenseTensor) -> float:
        return float(_sigmoid(self.lam * (g.data - self.tau)).sum())


def count_nodes_net(tau: float):
    """Family of entry-counting nets at threshold tau; call with (g, lam)."""

    def evaluate(g: DenseTensor, lam: float) -> float:
        return ThresholdNet(tau, lam).value(g)

    return evaluate


def saturation_error_bound(n: int, order: int, lam: float, gap: float) -> float:
    """How far a ThresholdNet can sit from its hard-count limit when every
    entry is at least `gap` away from the threshold."""
    return n**order * float(_sigmoid(np.asarray(-lam * gap)))


@dataclass(frozen=True)
class ExponentProfile:
    """Positive integer exponent per input tuple, shape (n,)*order."""

    exponents: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.exponents, dtype=np.int64)
        if arr.size == 0 or (arr < 1).any():
            raise ValueError("exponents must be positive integers")
        arr.setflags(write=False)
        object.__setattr__(self, "exponents", arr)


@lru_cache(maxsize=None)
def _perm_table(n: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """(perms, flat) with perms all n! relabelings and flat[s, t] the raveled
    position of the relabeled tuple sigma_s(t) for every tuple t in [n]^order."""
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    tuples = np.indices((n,) * order).reshape(order, -1)  # (order, n^order)
    mapped = perms[:, tuples]  # (n!, order, n^order)
    flat = np.zeros((perms.shape[0], tuples.shape[1]), dtype=np.int64)
    for axis in range(order):
        flat = flat * n + mapped[:, axis, :]
    return perms, flat


def multiset_profile(
    a: DenseTensor,
    profile: ExponentProfile,
    mode: str = "invariant",
    anchor: int = 0,
) -> float | np.ndarray:
    """Sum over relabelings of the entry-power product given by the profile.

    invariant:    sum over all sigma of prod_t a[sigma(t)]^k_t
    equivariant:  coordinate q sums only sigma with sigma(anchor) = q
    """
    n, order = a.n, a.order
    if n > PROFILE_MAX_NODES:
        raise ValueError(f"profile evaluation infeasible, n too large (max {PROFILE_MAX_NODES})")
    if profile.exponents.shape != a.data.shape:
        raise ValueError("profile shape must match the tensor shape")
    if (a.data <= 0).any():
        raise ValueError("profiles need strictly positive entries")
    perms, flat = _perm_table(n, order)
    powered = a.data.reshape(-1)[flat] ** profile.exponents.reshape(-1)[None, :]
    values = powered.prod(axis=1)  # (n!,)
    if mode == "invariant":
        return float(values.sum())
    if mode == "equivariant":
        if not 0 <= anchor < n:
            raise ValueError("anchor must be a node index")
        return np.bincount(perms[:, anchor], weights=values, minlength=n)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class SeparationBudget:
    lambdas: tuple[float, ...] = (1.0, 10.0, 50.0, 200.0)
    lex_profiles: int = 2000
    lex_max_exponent: int = 3
    random_profiles: int = 2000
    random_max_exponent: int = 6
    tol: float = 1e-9
    seed: int = 0


@dataclass
class SeparationResult:
    separated: bool
    stage: int | None
    params: dict
    value_a: float | None
    value_b: float | None
    tolerance: float
    note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "separated": self.separated,
            "stage": self.stage,
            "params": self.params,
            "value_a": self.value_a,
            "value_b": self.value_b,
            "tolerance": self.tolerance,
            "note": self.note,
        }


def _differ(v1: float, v2: float, tol: float) -> bool:
    return abs(v1 - v2) > 10.0 * tol * max(1.0, abs(v1), abs(v2))


def separate(
    g1: DenseTensor, g2: DenseTensor, budget: SeparationBudget = SeparationBudget()
) -> SeparationResult:
    """Search for an invariant network with different outputs on g1 and g2.

    Stage 1 counts entries above a threshold below every entry (separates
    different node counts in the sharp-threshold limit); stage 2 thresholds
    between differing sorted entries (separates different entry multisets);
    stage 3 scans exponent profiles of the sigmoid-squashed tensors.  Any
    value gap above 10*tol is a valid witness regardless of stage intent,
    since every probe is itself an invariant network.  Budget exhaustion is
    an honest "not separated", never a claim the graphs are isomorphic.
    """
    if g1.order != g2.order:
        raise ValueError("order mismatch")
    if max(g1.n, g2.n) > 4:
        raise ValueError("separation search supports n <= 4")
    tol = budget.tol

    # Stage 1: count entries above a floor threshold.
    tau = float(min(g1.data.min(), g2.data.min())) - 1.0
    for lam in budget.lambdas:
        net = ThresholdNet(tau, lam)
        v1, v2 = net.value(g1), net.value(g2)
        if _differ(v1, v2, tol):
            return SeparationResult(
                True, 1, {"tau": tau, "lambda": lam}, v1, v2, tol
            )

    if g1.n == g2.n:
        # Stage 2: thresholds between differing order statistics.
        s1 = np.sort(g1.ravel())
        s2 = np.sort(g2.ravel())
        for q in np.nonzero(s1 != s2)[0]:
            tau_q = float(s1[q] + s2[q]) / 2.0
            for lam in budget.lambdas:
                net = ThresholdNet(tau_q, lam)
                v1, v2 = net.value(g1), net.value(g2)
                if _differ(v1, v2, tol):
                    return SeparationResult(
                        True, 2, {"tau": tau_q, "lambda": lam, "rank": int(q)},
                        v1, v2, tol,
                    )

        # Stage 3: exponent profiles of the squashed tensors.
        a1 = DenseTensor(g1.order, g1.n, _sigmoid(g1.data))
        a2 = DenseTensor(g2.order, g2.n, _sigmoid(g2.data))
        size = g1.n**g1.order
        lex = itertools.islice(
            itertools.product(range(1, budget.lex_max_exponent + 1), repeat=size),
            budget.lex_profiles,
        )
        rng = np.random.default_rng(budget.seed)

        def random_profiles():
            for _ in range(budget.random_profiles):
                yield rng.integers(1, budget.random_max_exponent + 1, size=size)

        for source, exps in itertools.chain(
            (("lex", e) for e in lex), (("random", e) for e in random_profiles())
        ):
            profile = ExponentProfile(np.asarray(exps).reshape(g1.data.shape))
            v1 = multiset_profile(a1, profile)
            v2 = multiset_profile(a2, profile)
            if _differ(v1, v2, tol):
                return SeparationResult(
                    True, 3,
                    {"profile": profile.exponents.reshape(-1).tolist(), "source": source},
                    v1, v2, tol,
                )

    return SeparationResult(
        False, None, {}, None, None, tol, note="inconclusive: budget exhausted"
    )


@dataclass
class MultisetLemmaVerdict:
    aligned: bool
    witness: Permutation | None
    separating_profile: list | None
    value_a: float | None
    value_b: float | None
    violated: bool
    profiles_tried: int
    tolerance: float

    def to_json_dict(self) -> dict:
        return {
            "aligned": self.aligned,
            "witness": self.witness.mapping.tolist() if self.witness else None,
            "separating_profile": self.separating_profile,
            "value_a": self.value_a,
            "value_b": self.value_b,
            "violated": self.violated,
            "profiles_tried": self.profiles_tried,
            "tolerance": self.tolerance,
        }


def check_multiset_lemma(
    a: DenseTensor,
    a_prime: DenseTensor,
    max_exponent: int = 3,
    max_profiles: int = 20000,
    tol: float = 1e-9,
) -> MultisetLemmaVerdict:
    """Alignment dichotomy check for two arrangements of one entry multiset.

    Either some relabeling aligns the tensors, or an enumerated exponent
    profile distinguishes their invariant profiles.  A "violated" verdict
    (no alignment, no separating profile within the enumeration bound)
    should never occur.
    """
    if a.order != a_prime.order or a.n != a_prime.n:
        raise ValueError("tensors must share order and node count")
    if a.n > 3:
        raise ValueError("lemma check supports n <= 3")
    if (a.data <= 0).any() or (a_prime.data <= 0).any():
        raise ValueError("entries must be strictly positive")
    if not np.allclose(np.sort(a.ravel()), np.sort(a_prime.ravel()), atol=1e-12, rtol=0):
        raise ValueError("inputs must be arrangements of the same entry multiset")

    for perm in itertools.permutations(range(a.n)):
        sigma = Permutation(np.asarray(perm))
        if np.abs(a.data - permute(a_prime, sigma).data).max() <= tol:
            return MultisetLemmaVerdict(True, sigma, None, None, None, False, 0, tol)

    size = a.n**a.order
    tried = 0
    for exps in itertools.islice(
        itertools.product(range(1, max_exponent + 1), repeat=size), max_profiles
    ):
        tried += 1
        profile = ExponentProfile(np.asarray(exps).reshape(a.data.shape))
        v1 = multiset_profile(a, profile)
        v2 = multiset_profile(a_prime, profile)
        if _differ(v1, v2, tol):
            return MultisetLemmaVerdict(
                False, None, list(exps), v1, v2, False, tried, tol
            )
    return MultisetLemmaVerdict(False, None, None, None, None, True, tried, tol)
