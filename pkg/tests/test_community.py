import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hashtrace.community import Partition, louvain, modularity, read_partition, write_partition
from hashtrace.graph import WeightedGraph
from oracles import best_modularity, modularity_matrix_form
from test_graph import random_graph


def unit(edges, nodes=()):
    return WeightedGraph.from_edges({e: 1.0 for e in edges}, nodes=nodes)


def triangles():
    return unit([("a", "b"), ("b", "c"), ("a", "c"), ("x", "y"), ("y", "z"), ("x", "z")])


def two_cliques():
    left, right = "abcd", "wxyz"
    edges = [(u, v) for grp in (left, right) for u in grp for v in grp if u < v]
    return unit(edges + [("d", "w")])


class TestModularity:
    def test_two_triangles(self):
        p = Partition.from_groups([{"a", "b", "c"}, {"x", "y", "z"}])
        assert modularity(triangles(), p) == pytest.approx(0.5, abs=1e-12)

    def test_single_community_zero(self):
        g = unit([("a", "b")])
        assert modularity(g, Partition({"a": 0, "b": 0})) == pytest.approx(0.0, abs=1e-12)

    def test_k2_split(self):
        g = unit([("a", "b")])
        assert modularity(g, Partition({"a": 0, "b": 1})) == pytest.approx(-0.5, abs=1e-12)

    def test_missing_node(self):
        with pytest.raises(ValueError):
            modularity(unit([("a", "b")]), Partition({"a": 0}))

    def test_no_edges(self):
        with pytest.raises(ValueError):
            modularity(unit([], nodes=["a"]), Partition({"a": 0}))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6), st.floats(0.2, 2.0))
    def test_matches_matrix_form(self, seed, gamma):
        rng = random.Random(seed)
        g = random_graph(rng, 8, weighted=True)
        if not g.edges:
            return
        labels = {n: rng.randrange(3) for n in g.nodes}
        want = modularity_matrix_form(g.nodes, g.edges, labels, gamma)
        assert modularity(g, Partition(labels), gamma) == pytest.approx(want, abs=1e-12)


class TestLouvain:
    def test_two_cliques(self):
        p = louvain(two_cliques())
        assert sorted(map(sorted, p.communities())) == [list("abcd"), list("wxyz")]

    def test_disconnected_triangles(self):
        assert louvain(triangles()).num_communities == 2

    def test_deterministic(self):
        g = random_graph(random.Random(11), 8, weighted=True)
        assert louvain(g, seed=5) == louvain(g, seed=5)

    def test_edgeless_is_degenerate(self):
        p = louvain(unit([], nodes=["a", "b"]))
        assert p.degenerate and p.num_communities == 2

    def test_history_non_decreasing(self):
        p = louvain(two_cliques())
        assert all(b >= a - 1e-12 for a, b in zip(p.history, p.history[1:]))
        assert p.history[-1] == pytest.approx(modularity(two_cliques(), p))

    def test_ids_dense(self):
        p = louvain(random_graph(random.Random(2), 8))
        assert sorted(set(p.assignment.values())) == list(range(p.num_communities))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_close_to_optimum(self, seed):
        g = random_graph(random.Random(seed), 7, weighted=True)
        if not g.edges:
            return
        got = modularity(g, louvain(g, seed=seed))
        assert got >= best_modularity(g.nodes, g.edges) - 0.05

    def test_partition_io(self, tmp_path):
        p = louvain(two_cliques())
        write_partition(p, tmp_path / "p.txt")
        assert read_partition(tmp_path / "p.txt") == p


class TestPartition:
    def test_from_labels_orders_by_smallest_node(self):
        p = Partition.from_labels({"b": "x", "a": "y", "c": "x"})
        assert p.assignment == {"a": 0, "b": 1, "c": 1}

    def test_from_groups_overlap(self):
        with pytest.raises(ValueError):
            Partition.from_groups([{"a"}, {"a"}])
