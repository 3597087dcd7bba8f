import json

import numpy as np
import pytest

from permtensor import (
    DatasetConfig,
    DenseTensor,
    EditCosts,
    GraphSample,
    Permutation,
    TOPOLOGIES,
    all_pairs_shortest,
    diameter,
    eccentricities,
    edit_distance,
    eligible_topologies,
    generate,
    is_isomorphic,
    make_dataset,
    permute,
    read_dataset,
    with_targets,
    write_dataset,
)


def naive_shortest(g: DenseTensor) -> np.ndarray:
    """Oracle: enumerate every simple path from every start node."""
    n = g.n
    w = g.data
    best = np.full((n, n), np.inf)

    def dfs(start: int, node: int, visited: frozenset, cost: float) -> None:
        if cost < best[start, node]:
            best[start, node] = cost
        for nxt in range(n):
            if nxt not in visited and w[node, nxt] > 0:
                dfs(start, nxt, visited | {nxt}, cost + w[node, nxt])

    for s in range(n):
        dfs(s, s, frozenset([s]), 0.0)
    return best


def unit_graph(edges, n: int) -> DenseTensor:
    data = np.zeros((n, n))
    for i, j in edges:
        data[i, j] = data[j, i] = 1.0
    return DenseTensor(2, n, data)


PATH3 = unit_graph([(0, 1), (1, 2)], 3)
TRIANGLE = unit_graph([(0, 1), (1, 2), (0, 2)], 3)
STAR4 = unit_graph([(0, 1), (0, 2), (0, 3)], 4)
K2 = unit_graph([(0, 1)], 2)


@pytest.mark.parametrize("topology,n,edges", [
    ("path", 3, 2),
    ("path", 2, 1),
    ("star", 4, 3),
    ("cycle", 4, 4),
    ("complete", 5, 10),
    ("wheel", 5, 8),
    ("wheel", 4, 6),
])
def test_topology_edge_counts(topology, n, edges):
    sample = generate(topology, n, rng=np.random.default_rng(50))
    assert np.count_nonzero(sample.graph.data) == 2 * edges
    assert np.array_equal(sample.graph.data, sample.graph.data.T)
    assert np.all(sample.graph.data >= 0)
    assert np.all(np.diag(sample.graph.data) == 0)


def test_generate_validation():
    with pytest.raises(ValueError, match="unknown topology"):
        generate("tree", 4)
    with pytest.raises(ValueError, match="n too small"):
        generate("wheel", 3)


def test_generate_deterministic():
    a = generate("cycle", 5, rng=np.random.default_rng((7, 3)))
    b = generate("cycle", 5, rng=np.random.default_rng((7, 3)))
    assert np.array_equal(a.graph.data, b.graph.data)


def test_generate_asymmetric():
    sample = generate("path", 4, rng=np.random.default_rng(51), symmetric=False)
    d = sample.graph.data
    assert not np.array_equal(d, d.T)
    assert np.count_nonzero(d) == 6


def test_eligible_topologies():
    assert eligible_topologies(2) == ("complete", "path")
    assert eligible_topologies(3) == ("complete", "star", "cycle", "path")
    assert eligible_topologies(4) == TOPOLOGIES


def test_shortest_path_examples():
    assert diameter(PATH3) == 2.0
    assert np.array_equal(eccentricities(PATH3), [2.0, 1.0, 2.0])
    assert diameter(STAR4) == 2.0
    assert np.array_equal(eccentricities(STAR4), [1.0, 2.0, 2.0, 2.0])


def test_shortest_path_relaxes_heavy_edge():
    # direct edge weight 5 loses to the two-hop route of weight 2
    g = DenseTensor(2, 3, [[0, 5, 1], [5, 0, 1], [1, 1, 0]])
    d = all_pairs_shortest(g)
    assert d[0, 1] == 2.0
    assert diameter(g) == 2.0


@pytest.mark.parametrize("topology", TOPOLOGIES)
def test_shortest_path_matches_enumeration(topology):
    rng = np.random.default_rng(52)
    for n in (4, 5):
        sample = generate(topology, n, rng=rng)
        assert np.allclose(
            all_pairs_shortest(sample.graph), naive_shortest(sample.graph), atol=1e-12
        )


def test_disconnected_raises():
    g = DenseTensor(2, 4, np.kron(np.eye(2), np.array([[0, 1], [1, 0]])))
    with pytest.raises(ValueError, match="disconnected"):
        all_pairs_shortest(g)


def test_targets_invariant_under_relabeling():
    rng = np.random.default_rng(53)
    sample = generate("wheel", 6, rng=rng)
    base_ecc = eccentricities(sample.graph)
    for _ in range(10):
        sigma = Permutation.random(6, rng)
        moved = permute(sample.graph, sigma)
        assert diameter(moved) == pytest.approx(diameter(sample.graph), abs=1e-12)
        assert np.allclose(eccentricities(moved)[sigma.mapping], base_ecc, atol=1e-12)


def test_with_targets_task_selection():
    sample = GraphSample(PATH3, "path")
    both = with_targets(sample)
    assert both.diameter == 2.0 and both.ecc is not None
    only_d = with_targets(sample, ("diameter",))
    assert only_d.diameter == 2.0 and only_d.ecc is None
    only_e = with_targets(sample, ("eccentricity",))
    assert only_e.diameter is None and np.array_equal(only_e.ecc, [2.0, 1.0, 2.0])


def test_dataset_deterministic_and_counted():
    cfg = DatasetConfig(sizes=(4, 5), train_per_size=6, test_per_size=3, seed=9)
    ds1 = make_dataset(cfg)
    ds2 = make_dataset(cfg)
    assert len(ds1.train) == 12 and len(ds1.test) == 6
    for a, b in zip(ds1.train + ds1.test, ds2.train + ds2.test):
        assert a.topology == b.topology
        assert np.array_equal(a.graph.data, b.graph.data)
    assert ds1.r_bound == max(
        float(np.abs(s.graph.data).max()) for s in ds1.train + ds1.test
    )


def test_dataset_per_sample_streams():
    # sample i is pinned to its own stream: growing the split cannot move it
    small = make_dataset(DatasetConfig(sizes=(5,), train_per_size=3, seed=4))
    large = make_dataset(DatasetConfig(sizes=(5,), train_per_size=8, seed=4))
    for a, b in zip(small.train, large.train[:3]):
        assert np.array_equal(a.graph.data, b.graph.data)


def test_dataset_split_streams_differ():
    cfg = DatasetConfig(sizes=(5,), train_per_size=2, test_per_size=2, seed=4)
    ds = make_dataset(cfg)
    assert not np.array_equal(ds.train[0].graph.data, ds.test[0].graph.data)


def test_dataset_config_validation():
    with pytest.raises(ValueError, match="unknown task"):
        DatasetConfig(tasks=("radius",))
    with pytest.raises(ValueError, match="non-empty"):
        DatasetConfig(sizes=())


def test_dataset_jsonl_roundtrip(tmp_path):
    cfg = DatasetConfig(sizes=(4, 6), train_per_size=4, test_per_size=2, seed=11)
    ds = make_dataset(cfg)
    path = tmp_path / "data.jsonl"
    write_dataset(ds, path)
    header = json.loads(path.read_text().splitlines()[0])
    assert header["format"] == "permtensor-dataset-v1"
    assert header["indexing"] == "0-based"
    assert header["norm"] == "linf"
    assert header["R"] == ds.r_bound
    loaded = read_dataset(path)
    assert loaded.config == cfg
    assert loaded.r_bound == ds.r_bound
    assert len(loaded.train) == len(ds.train) and len(loaded.test) == len(ds.test)
    for a, b in zip(ds.train + ds.test, loaded.train + loaded.test):
        assert a.topology == b.topology
        assert np.array_equal(a.graph.data, b.graph.data)
        assert a.diameter == b.diameter
        assert np.array_equal(a.ecc, b.ecc)
    # a rewrite of the loaded dataset is byte-identical
    path2 = tmp_path / "again.jsonl"
    write_dataset(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_read_dataset_rejects_other_format(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps({"format": "something-else"}) + "\n")
    with pytest.raises(ValueError, match="format"):
        read_dataset(path)


def test_edit_distance_identical_and_relabeled():
    rng = np.random.default_rng(54)
    g = generate("wheel", 5, rng=rng).graph
    assert edit_distance(g, g) == 0.0
    sigma = Permutation.random(5, rng)
    assert edit_distance(g, permute(g, sigma)) == pytest.approx(0.0, abs=1e-12)


def test_edit_distance_triangle_vs_path():
    # one unit edge removed; symmetric storage counts it in both slots
    assert edit_distance(TRIANGLE, PATH3) == 2.0
    assert edit_distance(PATH3, TRIANGLE) == 2.0


def test_edit_distance_node_cost():
    # one node added (2.5) plus two missing unit edges (4.0 in both slots)
    costs = EditCosts(node_add=2.5)
    assert edit_distance(K2, TRIANGLE, costs) == 6.5
    assert edit_distance(TRIANGLE, K2, costs) == 6.5
    assert edit_distance(K2, TRIANGLE) == 5.0


def test_edit_distance_weight_change():
    g = DenseTensor(2, 3, TRIANGLE.data * 1.0)
    h = DenseTensor(2, 3, np.where(TRIANGLE.data > 0, 1.4, 0.0))
    assert edit_distance(g, h) == pytest.approx(0.4 * 6, abs=1e-12)


def test_edit_distance_symmetry_and_triangle_inequality():
    rng = np.random.default_rng(55)
    graphs = []
    for n in (2, 3, 4):
        for topology in eligible_topologies(n)[:2]:
            graphs.append(generate(topology, n, rng=rng).graph)
    for a in graphs:
        for b in graphs:
            dab = edit_distance(a, b)
            assert dab == pytest.approx(edit_distance(b, a), abs=1e-12)
            for c in graphs:
                assert dab <= edit_distance(a, c) + edit_distance(c, b) + 1e-12


def test_edit_distance_small_means_same_size():
    rng = np.random.default_rng(56)
    costs = EditCosts(node_add=1.0)
    for n1, n2 in [(2, 3), (3, 4), (2, 4)]:
        a = generate("path", n1, rng=rng).graph
        b = generate("path", n2, rng=rng).graph
        assert edit_distance(a, b, costs) >= costs.node_add * abs(n2 - n1)


def test_edit_distance_guard():
    big = DenseTensor(2, 9, np.zeros((9, 9)))
    small = DenseTensor(2, 3, np.zeros((3, 3)))
    with pytest.raises(ValueError, match="too large"):
        edit_distance(big, small)
    with pytest.raises(ValueError, match="order mismatch"):
        edit_distance(small, DenseTensor(1, 3, np.zeros(3)))


def test_edit_costs_validation():
    with pytest.raises(ValueError, match="positive"):
        EditCosts(node_add=0.0)


def test_is_isomorphic_witness():
    rng = np.random.default_rng(57)
    g = generate("star", 5, rng=rng).graph
    sigma = Permutation.random(5, rng)
    moved = permute(g, sigma)
    witness = is_isomorphic(moved, g)
    assert witness is not None
    assert np.abs(moved.data - permute(g, witness).data).max() <= 1e-9


def test_is_isomorphic_negative():
    assert is_isomorphic(TRIANGLE, PATH3) is None
    assert is_isomorphic(K2, TRIANGLE) is None
    path3_star3 = is_isomorphic(
        unit_graph([(0, 1), (1, 2)], 3), unit_graph([(1, 0), (1, 2)], 3)
    )
    assert path3_star3 is not None
