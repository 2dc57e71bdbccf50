"""Agent communication and hashtag co-occurrence networks."""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np
from scipy import sparse

from .corpus import Corpus


def _key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with positive edge weights, no self-loops.

    Edge keys are stored once as ``(u, v)`` with ``u < v``.
    """

    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], float]
    node_attrs: dict[str, dict] = field(default_factory=dict)
    adjacency: dict[str, dict[str, float]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj: dict[str, dict[str, float]] = {n: {} for n in self.nodes}
        for (u, v), w in self.edges.items():
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if not u < v:
                raise ValueError(f"edge key {(u, v)!r} not ordered")
            if w <= 0:
                raise ValueError(f"non-positive weight on {(u, v)!r}")
            if u not in adj or v not in adj:
                raise ValueError(f"edge {(u, v)!r} references unknown node")
            adj[u][v] = w
            adj[v][u] = w
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_edges(
        cls,
        edges: Mapping[tuple[str, str], float] | Iterable[tuple[str, str, float]],
        nodes: Iterable[str] = (),
        node_attrs: Optional[dict[str, dict]] = None,
    ) -> "WeightedGraph":
        """Build from ``(u, v)`` keys in either orientation; duplicates add up."""
        weights: dict[tuple[str, str], float] = defaultdict(float)
        items = edges.items() if isinstance(edges, Mapping) else ((e[:2], e[2]) for e in edges)
        all_nodes = set(nodes)
        for (u, v), w in items:
            all_nodes.update((u, v))
            if u != v:
                weights[_key(u, v)] += w
        return cls(
            nodes=tuple(sorted(all_nodes)),
            edges=dict(sorted(weights.items())),
            node_attrs=dict(node_attrs or {}),
        )

    def __len__(self) -> int:
        return len(self.nodes)

    def neighbors(self, node: str) -> dict[str, float]:
        return self.adjacency[node]

    def weight(self, u: str, v: str) -> float:
        return self.edges.get(_key(u, v), 0.0)

    @property
    def total_weight(self) -> float:
        return float(sum(self.edges.values()))

    def with_attrs(self, name: str, values: Mapping[str, object]) -> "WeightedGraph":
        """Copy with one node attribute set (nodes missing from ``values`` untouched)."""
        attrs = {n: dict(self.node_attrs.get(n, {})) for n in self.nodes}
        for node, value in values.items():
            if node in attrs:
                attrs[node][name] = value
        return WeightedGraph(nodes=self.nodes, edges=self.edges, node_attrs=attrs)

    def subgraph(self, keep: Iterable[str]) -> "WeightedGraph":
        keep = set(keep)
        return WeightedGraph(
            nodes=tuple(n for n in self.nodes if n in keep),
            edges={k: w for k, w in self.edges.items() if k[0] in keep and k[1] in keep},
            node_attrs={n: a for n, a in self.node_attrs.items() if n in keep},
        )

    def components(self) -> list[list[str]]:
        """Connected components, each sorted, in order of their smallest node."""
        seen: set[str] = set()
        comps = []
        for start in self.nodes:
            if start in seen:
                continue
            seen.add(start)
            stack, comp = [start], []
            while stack:
                node = stack.pop()
                comp.append(node)
                for nb in self.adjacency[node]:
                    if nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
            comps.append(sorted(comp))
        return comps


def build_communication_network(corpus: Corpus) -> WeightedGraph:
    """One node per corpus agent; edge weight counts mention and retweet events.

    Each tweet contributes one event per distinct mentioned agent plus one
    for the retweeted author. Direction is discarded.
    """
    weights: Counter = Counter()
    for tweet in corpus.tweets:
        for target in set(tweet.mentions):
            if target != tweet.author_id:
                weights[_key(tweet.author_id, target)] += 1
        rt = tweet.retweet_of_author
        if rt and rt != tweet.author_id:
            weights[_key(tweet.author_id, rt)] += 1
    return WeightedGraph.from_edges(
        {k: float(w) for k, w in weights.items()}, nodes=corpus.agents
    )


def build_hashtag_cooccurrence(corpus: Corpus) -> WeightedGraph:
    """Hashtags linked when they share a tweet; ``frequency`` attribute = tweets using the tag."""
    weights: Counter = Counter()
    freq: Counter = Counter()
    for tweet in corpus.tweets:
        tags = sorted(set(tweet.hashtags))
        freq.update(tags)
        for u, v in combinations(tags, 2):
            weights[(u, v)] += 1
    attrs = {tag: {"frequency": n} for tag, n in freq.items()}
    return WeightedGraph.from_edges(
        {k: float(w) for k, w in weights.items()}, nodes=freq, node_attrs=attrs
    )


def _index(g: WeightedGraph) -> dict[str, int]:
    return {n: i for i, n in enumerate(g.nodes)}


def adjacency_matrix(g: WeightedGraph, weighted: bool = True) -> sparse.csr_matrix:
    idx = _index(g)
    n = len(g.nodes)
    if not g.edges:
        return sparse.csr_matrix((n, n))
    rows, cols, vals = [], [], []
    for (u, v), w in g.edges.items():
        i, j = idx[u], idx[v]
        val = w if weighted else 1.0
        rows += [i, j]
        cols += [j, i]
        vals += [val, val]
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def betweenness_centrality(g: WeightedGraph, chunk: int = 256) -> dict[str, float]:
    """Unnormalized shortest-path betweenness with hop distances.

    Brandes' dependency accumulation, run level-synchronously for a block
    of sources at a time. Each unordered pair is counted once.
    """
    n = len(g.nodes)
    if n == 0:
        return {}
    adj = adjacency_matrix(g, weighted=False)
    total = np.zeros(n)
    for lo in range(0, n, chunk):
        sources = np.arange(lo, min(n, lo + chunk))
        total += _dependency_block(adj, sources, n)
    return {node: float(total[i]) / 2.0 for i, node in enumerate(g.nodes)}


def _dependency_block(adj: sparse.csr_matrix, sources: np.ndarray, n: int) -> np.ndarray:
    rows = np.arange(len(sources))
    dist = np.full((len(sources), n), -1, dtype=np.int64)
    sigma = np.zeros((len(sources), n))
    dist[rows, sources] = 0
    sigma[rows, sources] = 1.0
    frontier = sigma.copy()
    depth = 0
    while True:
        reached = np.asarray(frontier @ adj)
        reached[dist >= 0] = 0.0
        if not reached.any():
            break
        depth += 1
        dist[reached > 0] = depth
        sigma += reached
        frontier = reached

    delta = np.zeros_like(sigma)
    for d in range(depth, 0, -1):
        on_level = dist == d
        coef = np.where(on_level, (1.0 + delta) / np.where(on_level, sigma, 1.0), 0.0)
        pulled = np.asarray(coef @ adj)
        parents = dist == d - 1
        delta += np.where(parents, sigma * pulled, 0.0)
    delta[rows, sources] = 0.0
    return delta.sum(axis=0)


class EigenvectorScores(dict):
    """Node -> score mapping carrying convergence details."""

    def __init__(self, scores, eigenvalue: float, iterations: int, converged: bool, component):
        super().__init__(scores)
        self.eigenvalue = eigenvalue
        self.iterations = iterations
        self.converged = converged
        self.component = list(component)


def largest_component(g: WeightedGraph) -> list[str]:
    """Component with most nodes; ties go to larger total weight, then smallest label."""

    comps = g.components()
    owner = {node: i for i, comp in enumerate(comps) for node in comp}
    weight = [0.0] * len(comps)
    for (u, _), w in g.edges.items():
        weight[owner[u]] += w
    best = min(range(len(comps)), key=lambda i: (-len(comps[i]), -weight[i], comps[i][0]))
    return comps[best]


def eigenvector_centrality(
    g: WeightedGraph, tol: float = 1e-8, max_iter: int = 1000
) -> EigenvectorScores:
    """Power iteration on the weighted adjacency of the largest component.

    Iterates with ``A + I`` so bipartite components still converge; the
    eigenvectors are those of ``A``. Nodes outside the component score 0.
    The returned mapping has ``converged`` set False if ``max_iter`` ran out.
    """
    if not g.nodes:
        raise ValueError("eigenvector centrality of an empty graph")
    comp = largest_component(g)
    sub = g.subgraph(comp)
    a = adjacency_matrix(sub)
    m = len(comp)
    x = np.full(m, 1.0 / math.sqrt(m))
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        nxt = a @ x + x
        nxt /= np.linalg.norm(nxt)
        diff = np.max(np.abs(nxt - x))
        x = nxt
        if diff < tol:
            converged = True
            break
    eigenvalue = float(x @ (a @ x))
    scores = {node: 0.0 for node in g.nodes}
    scores.update({node: float(abs(val)) for node, val in zip(sub.nodes, x)})
    return EigenvectorScores(scores, eigenvalue, it, converged, sub.nodes)


def total_degree_centrality(g: WeightedGraph) -> dict[str, float]:
    return {node: float(sum(g.adjacency[node].values())) for node in g.nodes}


@dataclass(frozen=True)
class CentralityScores:
    betweenness: dict[str, float]
    eigenvector: dict[str, float]
    total_degree: dict[str, float]
    convention: str = (
        "betweenness: unnormalized, hop distance; "
        "eigenvector: weighted, largest component, unit L2 norm; "
        "total_degree: weighted"
    )


def centralities(g: WeightedGraph) -> CentralityScores:
    return CentralityScores(
        betweenness=betweenness_centrality(g),
        eigenvector=dict(eigenvector_centrality(g)) if g.nodes else {},
        total_degree=total_degree_centrality(g),
    )


# ---------------------------------------------------------------- export

EXPORT_FORMATS = ("graphml", "dot", "edgelist")


def _graphml_type(values) -> str:
    if all(isinstance(v, bool) for v in values):
        return "boolean"
    if all(isinstance(v, int) and not isinstance(v, bool) for v in values):
        return "long"
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        return "double"
    return "string"


def _graphml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def export_graph(g: WeightedGraph, fmt: str, path) -> Path:
    """Write ``g`` as GraphML, DOT or a ``u v weight`` edge list."""
    if fmt not in EXPORT_FORMATS:
        raise ValueError(f"unknown export format {fmt!r}; expected one of {EXPORT_FORMATS}")
    path = Path(path)
    attr_names = sorted({k for a in g.node_attrs.values() for k in a})
    if fmt == "edgelist":
        lines = ["# u v weight"]
        for (u, v), w in g.edges.items():
            if any(c.isspace() for c in u + v):
                raise ValueError(f"edge list cannot hold node labels with whitespace: {(u, v)!r}")
            lines.append(f"{u} {v} {_fmt_weight(w)}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif fmt == "dot":
        def q(s) -> str:
            return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'

        lines = ["graph G {"]
        for node in g.nodes:
            attrs = g.node_attrs.get(node, {})
            inner = ", ".join(f"{k}={q(_graphml_value(attrs[k]))}" for k in attr_names if k in attrs)
            lines.append(f"  {q(node)}" + (f" [{inner}]" if inner else "") + ";")
        for (u, v), w in g.edges.items():
            lines.append(f"  {q(u)} -- {q(v)} [weight={_fmt_weight(w)}];")
        lines.append("}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        ns = "http://graphml.graphdrawing.org/xmlns"
        root = ET.Element("graphml", xmlns=ns)
        for name in attr_names:
            values = [a[name] for a in g.node_attrs.values() if name in a]
            ET.SubElement(
                root, "key", id=f"n_{name}", attrib={"for": "node", "attr.name": name,
                                                     "attr.type": _graphml_type(values)}
            )
        ET.SubElement(
            root, "key", id="e_weight",
            attrib={"for": "edge", "attr.name": "weight", "attr.type": "double"},
        )
        graph = ET.SubElement(root, "graph", id="G", edgedefault="undirected")
        for node in g.nodes:
            el = ET.SubElement(graph, "node", id=node)
            attrs = g.node_attrs.get(node, {})
            for name in attr_names:
                if name in attrs:
                    ET.SubElement(el, "data", key=f"n_{name}").text = _graphml_value(attrs[name])
        for (u, v), w in g.edges.items():
            el = ET.SubElement(graph, "edge", source=u, target=v)
            ET.SubElement(el, "data", key="e_weight").text = repr(float(w))
        ET.indent(root)
        ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)
    return path


def read_edgelist(path) -> WeightedGraph:
    edges = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        u, v, w = line.split()
        edges[(u, v)] = float(w)
    return WeightedGraph.from_edges(edges)
