import math
import random
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import corpus_of, tw
from hashtrace.graph import (
    WeightedGraph,
    adjacency_matrix,
    betweenness_centrality,
    build_communication_network,
    build_hashtag_cooccurrence,
    eigenvector_centrality,
    export_graph,
    read_edgelist,
    total_degree_centrality,
)
from oracles import brute_betweenness


def graph(edges, nodes=()):
    return WeightedGraph.from_edges({(u, v): 1.0 for u, v in edges}, nodes=nodes)


def k4(extra=()):
    return graph([(a, b) for a in "abcd" for b in "abcd" if a < b], nodes=extra)


def random_graph(rng, max_nodes=8, weighted=False):
    n = rng.randint(1, max_nodes)
    nodes = [f"n{i}" for i in range(n)]
    p = rng.random()
    edges = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges[(nodes[i], nodes[j])] = float(rng.randint(1, 5)) if weighted else 1.0
    return WeightedGraph.from_edges(edges, nodes=nodes)


class TestCommunicationNetwork:
    def test_repeated_mentions_accumulate(self):
        c = corpus_of([tw("1", "a", mentions=["b"]), tw("2", "a", mentions=["b"])])
        assert build_communication_network(c).weight("a", "b") == 2

    def test_direction_discarded(self):
        c = corpus_of([tw("1", "a", rt="b"), tw("2", "b", mentions=["a"])])
        assert build_communication_network(c).weight("a", "b") == 2

    def test_no_interactions(self):
        g = build_communication_network(corpus_of([tw("1", "a"), tw("2", "b")]))
        assert set(g.nodes) == {"a", "b"} and not g.edges

    def test_self_mention_ignored(self):
        g = build_communication_network(corpus_of([tw("1", "a", mentions=["a"])]))
        assert not g.edges


class TestHashtagGraph:
    def test_triangle(self):
        g = build_hashtag_cooccurrence(corpus_of([tw("1", "u", hashtags=["a", "b", "c"])]))
        assert g.edges == {("a", "b"): 1.0, ("a", "c"): 1.0, ("b", "c"): 1.0}

    def test_repeat_pair(self):
        c = corpus_of([tw("1", "u", hashtags=["a", "b"]), tw("2", "v", hashtags=["b", "a"])])
        g = build_hashtag_cooccurrence(c)
        assert g.weight("a", "b") == 2
        assert g.node_attrs["a"]["frequency"] == 2

    def test_hijack_pair_linked(self):
        c = corpus_of([tw("1", "u", hashtags=["aqsacallsarmies", "m4p8"])])
        assert build_hashtag_cooccurrence(c).weight("aqsacallsarmies", "m4p8") == 1


class TestGraphType:
    def test_rejects_bad_edges(self):
        with pytest.raises(ValueError):
            WeightedGraph(nodes=("a", "b"), edges={("b", "a"): 1.0})
        with pytest.raises(ValueError):
            WeightedGraph(nodes=("a", "b"), edges={("a", "b"): 0.0})
        with pytest.raises(ValueError):
            WeightedGraph(nodes=("a",), edges={("a", "b"): 1.0})

    def test_components(self):
        g = graph([("a", "b"), ("c", "d")], nodes=["e"])
        assert g.components() == [["a", "b"], ["c", "d"], ["e"]]


class TestBetweenness:
    def test_star(self):
        g = graph([("c", "x"), ("c", "y"), ("c", "z")])
        assert betweenness_centrality(g) == {"c": 3.0, "x": 0.0, "y": 0.0, "z": 0.0}

    def test_path(self):
        assert betweenness_centrality(graph([("a", "b"), ("b", "c")])) == {"a": 0, "b": 1, "c": 0}

    def test_complete(self):
        assert set(betweenness_centrality(k4()).values()) == {0.0}

    def test_square_splits_credit(self):
        g = graph([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])
        assert betweenness_centrality(g) == {n: 0.5 for n in "abcd"}

    def test_weights_ignored(self):
        g = WeightedGraph.from_edges({("a", "b"): 9.0, ("b", "c"): 1.0, ("a", "c"): 1.0})
        assert set(betweenness_centrality(g).values()) == {0.0}

    def test_chunking_invariant(self):
        g = random_graph(random.Random(3), 8)
        assert betweenness_centrality(g, chunk=1) == pytest.approx(betweenness_centrality(g, chunk=256))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_matches_path_enumeration(self, seed):
        g = random_graph(random.Random(seed), 7)
        want = brute_betweenness(list(g.nodes), list(g.edges))
        got = betweenness_centrality(g)
        for n in g.nodes:
            assert got[n] == pytest.approx(float(want[n]), abs=1e-9)


class TestEigenvector:
    def test_complete_graph(self):
        assert all(v == pytest.approx(0.5, abs=1e-8) for v in eigenvector_centrality(k4()).values())

    def test_path(self):
        s = eigenvector_centrality(graph([("a", "b"), ("b", "c")]))
        assert s["b"] == pytest.approx(1 / math.sqrt(2), abs=1e-6)
        assert s["a"] == pytest.approx(0.5, abs=1e-6) and s["c"] == pytest.approx(0.5, abs=1e-6)
        assert s.eigenvalue == pytest.approx(math.sqrt(2), abs=1e-6)

    def test_isolated_node_scores_zero(self):
        s = eigenvector_centrality(k4(extra=["z"]))
        assert s["z"] == 0.0 and s.component == ["a", "b", "c", "d"]

    def test_nonconvergence_flagged(self):
        s = eigenvector_centrality(graph([("a", "b"), ("b", "c"), ("c", "d")]), max_iter=2)
        assert not s.converged

    def test_empty(self):
        with pytest.raises(ValueError):
            eigenvector_centrality(WeightedGraph((), {}))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_residual(self, seed):
        g = random_graph(random.Random(seed), 8, weighted=True)
        s = eigenvector_centrality(g, tol=1e-12, max_iter=20000)
        sub = g.subgraph(s.component)
        a = adjacency_matrix(sub).toarray()
        x = np.array([s[n] for n in sub.nodes])
        assert np.linalg.norm(x) == pytest.approx(1.0)
        assert np.max(np.abs(a @ x - s.eigenvalue * x)) < 1e-6


class TestDegree:
    def test_star_isolated_weighted(self):
        g = WeightedGraph.from_edges({("c", "x"): 1.0, ("c", "y"): 1.0, ("c", "z"): 1.0}, nodes=["i"])
        d = total_degree_centrality(g)
        assert d["c"] == 3 and d["i"] == 0
        g2 = WeightedGraph.from_edges({("n", "a"): 2.0, ("n", "b"): 5.0})
        assert total_degree_centrality(g2)["n"] == 7


class TestExport:
    def test_empty_graphml(self, tmp_path):
        p = export_graph(WeightedGraph((), {}), "graphml", tmp_path / "g.graphml")
        root = ET.parse(p).getroot()
        assert root.findall(".//{http://graphml.graphdrawing.org/xmlns}node") == []

    def test_single_edge_edgelist(self, tmp_path):
        p = export_graph(graph([("a", "b")]), "edgelist", tmp_path / "g.txt")
        lines = [ln for ln in p.read_text().splitlines() if not ln.startswith("#")]
        assert lines == ["a b 1"]

    def test_graphml_attributes(self, tmp_path):
        g = graph([("a", "b")]).with_attrs("discovered", {"a": True, "b": False})
        text = export_graph(g, "graphml", tmp_path / "g.graphml").read_text()
        assert 'attr.name="discovered"' in text and 'attr.type="boolean"' in text

    def test_dot(self, tmp_path):
        text = export_graph(graph([("a", "b")]), "dot", tmp_path / "g.dot").read_text()
        assert '"a" -- "b" [weight=1];' in text

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            export_graph(graph([]), "gexf", tmp_path / "g")

    def test_whitespace_labels_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            export_graph(graph([("a b", "c")]), "edgelist", tmp_path / "g.txt")

    @settings(max_examples=40, deadline=None)
    @given(st.dictionaries(
        st.tuples(st.sampled_from("abcdef"), st.sampled_from("abcdef")).filter(lambda e: e[0] < e[1]),
        st.floats(0.001, 1e6, allow_nan=False),
        max_size=15,
    ))
    def test_edgelist_round_trip(self, tmp_path_factory, edges):
        g = WeightedGraph.from_edges(edges)
        p = export_graph(g, "edgelist", tmp_path_factory.mktemp("rt") / "g.txt")
        assert read_edgelist(p).edges == g.edges
