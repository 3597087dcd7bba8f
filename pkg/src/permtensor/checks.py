"""Randomized property suites behind `permtensor check` and the acceptance tests.

Each suite draws its own corpus from a seed, verifies a contract against an
independent oracle (brute-force relabelings, central finite differences,
direct product evaluation), and reports counts plus human-readable failure
descriptions.  Suites never mutate global state, so they can run in any
order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .equilinear import EquivariantMap, InvariantMap, apply_equivariant, apply_invariant
from .gnn import (
    GnnModel,
    ModelSpec,
    flatten_params,
    forward,
    gradient,
    init_params,
    model_spec,
    param_count,
    unflatten_params,
)
from .graphs import is_isomorphic
from .oracles import (
    SeparationBudget,
    SeparationResult,
    check_multiset_lemma,
    closure_equivariant,
    closure_invariant,
    separate,
)
from .partitions import bell, enumerate_partitions
from .tensor import DenseTensor, Permutation, kron, permute


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    failures: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def record(self, ok: bool, message: str = "") -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append(message)

    @property
    def ok(self) -> bool:
        return self.failed == 0


BELL_EXPECTED = (1, 1, 2, 5, 15, 52, 203, 877, 4140)


def bell_suite() -> SuiteResult:
    res = SuiteResult("bell")
    for m, expected in enumerate(BELL_EXPECTED):
        count = len(enumerate_partitions(m))
        res.record(
            count == expected and bell(m) == expected,
            f"m={m}: enumerated {count}, bell {bell(m)}, expected {expected}",
        )
    return res


def _random_model(rng: np.random.Generator, mode: str, orders: tuple[int, ...],
                  activation: str = "sigmoid", input_order: int = 2) -> GnnModel:
    spec = ModelSpec(input_order, mode, activation, orders)
    vec = rng.uniform(-1.0, 1.0, param_count(spec))
    return unflatten_params(spec, vec)


def equivariance_suite(seed: int = 0, models: int = 100, perms: int = 20,
                       tol: float = 1e-10) -> SuiteResult:
    """forward must commute with relabeling: scalar outputs unchanged, vector
    outputs relabeled, to within tol in the infinity norm."""
    rng = np.random.default_rng((seed, 10))
    res = SuiteResult("equivariance")
    for i in range(models):
        mode = "invariant" if i % 2 == 0 else "equivariant"
        n = int(rng.choice([3, 5, 6]))
        width = int(rng.integers(1, 4))
        orders = tuple(int(rng.integers(1, 4)) for _ in range(width))
        model = _random_model(rng, mode, orders)
        g = DenseTensor(2, n, rng.uniform(-1.0, 1.0, (n, n)))
        base = forward(model, g)
        worst = 0.0
        for _ in range(perms):
            sigma = Permutation.random(n, rng)
            moved = forward(model, permute(g, sigma))
            if mode == "invariant":
                worst = max(worst, abs(moved - base))
            else:
                expect = permute(base, sigma)
                worst = max(worst, float(np.abs(moved.data - expect.data).max()))
        res.record(worst <= tol, f"model {i} ({mode}, n={n}, orders={orders}): residual {worst:.2e}")
    return res


def _fd_gradient(model: GnnModel, g: DenseTensor, upstream, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of <f(g), upstream> over the flat parameters."""
    spec = model_spec(model)
    theta = flatten_params(model)

    def value(vec: np.ndarray) -> float:
        out = forward(unflatten_params(spec, vec), g)
        if isinstance(out, DenseTensor):
            return float(np.dot(out.data, np.asarray(upstream)))
        return float(out) * float(upstream)

    fd = np.empty_like(theta)
    for i in range(theta.size):
        plus = theta.copy()
        plus[i] += h
        minus = theta.copy()
        minus[i] -= h
        fd[i] = (value(plus) - value(minus)) / (2.0 * h)
    return fd


def gradient_suite(seed: int = 0, pairs: int = 20, rel_tol: float = 1e-4) -> SuiteResult:
    """Analytic gradient vs central differences, every coordinate."""
    rng = np.random.default_rng((seed, 11))
    res = SuiteResult("gradients")
    for i in range(pairs):
        mode = "invariant" if i % 2 == 0 else "equivariant"
        n = 4
        orders = tuple(int(rng.integers(1, 3)) for _ in range(int(rng.integers(1, 3))))
        model = _random_model(rng, mode, orders)
        g = DenseTensor(2, n, rng.normal(0.0, 0.5, (n, n)))
        upstream = 1.0 if mode == "invariant" else rng.normal(0.0, 1.0, n)
        analytic = gradient(model, g, upstream)
        fd = _fd_gradient(model, g, upstream)
        denom = np.maximum(1e-6, np.maximum(np.abs(analytic), np.abs(fd)))
        rel = float((np.abs(analytic - fd) / denom).max())
        res.record(rel <= rel_tol, f"pair {i} ({mode}, orders={orders}): max rel err {rel:.2e}")
    return res


def closure_suite(seed: int = 0, instances: int = 50, tol: float = 1e-10) -> SuiteResult:
    """Product and coordinatewise-product identities of the closure maps."""
    rng = np.random.default_rng((seed, 12))
    res = SuiteResult("closure")
    for i in range(instances):
        n = int(rng.choice([3, 4]))
        k1 = int(rng.integers(1, 3))
        k2 = int(rng.integers(1, 3))
        g1 = DenseTensor(k1, n, rng.uniform(-1.0, 1.0, (n,) * k1))
        g2 = DenseTensor(k2, n, rng.uniform(-1.0, 1.0, (n,) * k2))
        if i % 2 == 0:
            h1 = InvariantMap(k1, rng.uniform(-1.0, 1.0, bell(k1)))
            h2 = InvariantMap(k2, rng.uniform(-1.0, 1.0, bell(k2)))
            h3 = closure_invariant(h1, h2)
            lhs = apply_invariant(h3, kron(g1, g2))
            rhs = apply_invariant(h1, g1) * apply_invariant(h2, g2)
            err = abs(lhs - rhs)
        else:
            h1 = EquivariantMap(k1, 1, rng.uniform(-1.0, 1.0, bell(k1 + 1)))
            h2 = EquivariantMap(k2, 1, rng.uniform(-1.0, 1.0, bell(k2 + 1)))
            h3 = closure_equivariant(h1, h2)
            lhs = apply_equivariant(h3, kron(g1, g2)).data
            rhs = apply_equivariant(h1, g1).data * apply_equivariant(h2, g2).data
            err = float(np.abs(lhs - rhs).max())
        res.record(err <= tol, f"instance {i} (n={n}, k1={k1}, k2={k2}): err {err:.2e}")
    return res


def _random_graph(rng: np.random.Generator, n: int) -> DenseTensor:
    w = np.abs(rng.normal(0.0, 1.0, (n, n)))
    np.fill_diagonal(w, 0.0)
    return DenseTensor(2, n, (w + w.T) / 2.0)


def separation_suite(
    seed: int = 0,
    pairs: int = 50,
    isomorphic_pairs: int = 10,
    lemma_instances: int = 500,
) -> tuple[SuiteResult, list[SeparationResult]]:
    """Separation completeness and soundness, plus the alignment dichotomy.

    Random non-isomorphic same-size pairs must separate at a 95% rate (they
    separate at stage 2 in practice since entry multisets differ); relabeled
    copies must never separate; rearranged entry multisets must never
    produce a lemma violation.
    """
    rng = np.random.default_rng((seed, 13))
    res = SuiteResult("separation")
    witnesses: list[SeparationResult] = []

    separated = 0
    for i in range(pairs):
        n = int(rng.choice([2, 3, 4]))
        g1 = _random_graph(rng, n)
        g2 = _random_graph(rng, n)
        while is_isomorphic(g1, g2, tol=1e-9) is not None:
            g2 = _random_graph(rng, n)
        outcome = separate(g1, g2, SeparationBudget(seed=int(rng.integers(2**31))))
        witnesses.append(outcome)
        if outcome.separated:
            separated += 1
    rate = separated / pairs if pairs else 1.0
    res.record(rate >= 0.95, f"separated {separated}/{pairs} non-isomorphic pairs")
    res.extra["separated"] = separated
    res.extra["pairs"] = pairs

    sound = 0
    for i in range(isomorphic_pairs):
        n = int(rng.choice([2, 3, 4]))
        g1 = _random_graph(rng, n)
        sigma = Permutation.random(n, rng)
        outcome = separate(g1, permute(g1, sigma))
        witnesses.append(outcome)
        if not outcome.separated:
            sound += 1
    res.record(
        sound == isomorphic_pairs,
        f"{isomorphic_pairs - sound} relabeled copies were wrongly separated",
    )

    violations = 0
    for i in range(lemma_instances):
        n = int(rng.choice([2, 3]))
        entries = rng.uniform(0.2, 2.0, n * n)
        a = DenseTensor(2, n, entries.reshape(n, n))
        a_prime = DenseTensor(2, n, rng.permutation(entries).reshape(n, n))
        verdict = check_multiset_lemma(a, a_prime)
        if verdict.violated:
            violations += 1
    res.record(violations == 0, f"{violations} lemma violations in {lemma_instances} instances")
    res.extra["lemma_instances"] = lemma_instances
    res.extra["lemma_violations"] = violations
    return res, witnesses


SUITES = ("bell", "equivariance", "gradients", "closure", "separation")


def run_suite(name: str, seed: int = 0) -> tuple[SuiteResult, list[SeparationResult]]:
    if name == "bell":
        return bell_suite(), []
    if name == "equivariance":
        return equivariance_suite(seed), []
    if name == "gradients":
        return gradient_suite(seed), []
    if name == "closure":
        return closure_suite(seed), []
    if name == "separation":
        return separation_suite(seed)
    raise ValueError(f"unknown suite {name!r}; choose one of {SUITES}")
