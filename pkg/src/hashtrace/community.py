"""Modularity and Louvain community detection."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .graph import WeightedGraph

_EPS = 1e-12


@dataclass(frozen=True)
class Partition:
    """Node -> community id, ids dense from 0.

    ``history`` holds the modularity after each Louvain level;
    ``degenerate`` marks a partition produced from an edgeless graph.
    """

    assignment: dict[str, int]
    degenerate: bool = False
    history: tuple[float, ...] = field(default=(), compare=False)

    @property
    def num_communities(self) -> int:
        return len(set(self.assignment.values()))

    @classmethod
    def from_labels(cls, labels: Mapping[str, object], **kw) -> "Partition":
        """Relabel arbitrary community labels to 0..k-1, ordered by each community's smallest node."""
        first: dict[object, str] = {}
        for node in sorted(labels):
            first.setdefault(labels[node], node)
        order = {lab: i for i, lab in enumerate(sorted(first, key=first.__getitem__))}
        return cls({node: order[labels[node]] for node in sorted(labels)}, **kw)

    @classmethod
    def from_groups(cls, groups: Iterable[Iterable[str]], **kw) -> "Partition":
        labels = {}
        for i, group in enumerate(groups):
            for node in group:
                if node in labels:
                    raise ValueError(f"node {node!r} in two groups")
                labels[node] = i
        return cls.from_labels(labels, **kw)

    def communities(self) -> list[set[str]]:
        out: list[set[str]] = [set() for _ in range(self.num_communities)]
        for node, c in self.assignment.items():
            out[c].add(node)
        return out


def modularity(g: WeightedGraph, p: Partition, resolution: float = 1.0) -> float:
    """Weighted Newman modularity with a resolution factor."""
    missing = set(g.nodes) - p.assignment.keys()
    if missing:
        raise ValueError(f"partition does not cover nodes {sorted(missing)[:5]}")
    m = g.total_weight
    if m <= 0:
        raise ValueError("modularity is undefined for a graph with no edge weight")
    internal: dict[int, float] = {}
    degree: dict[int, float] = {}
    for (u, v), w in g.edges.items():
        cu, cv = p.assignment[u], p.assignment[v]
        degree[cu] = degree.get(cu, 0.0) + w
        degree[cv] = degree.get(cv, 0.0) + w
        if cu == cv:
            internal[cu] = internal.get(cu, 0.0) + w
    q = 0.0
    for c, d in degree.items():
        q += internal.get(c, 0.0) / m - resolution * (d / (2 * m)) ** 2
    return q


class _Level:
    """Working graph for one Louvain level (integer nodes)."""

    def __init__(self, adj: list[dict[int, float]], loops: list[float]):
        self.adj = adj
        self.loops = loops
        self.k = [loops[i] + sum(nb.values()) for i, nb in enumerate(adj)]

    def __len__(self):
        return len(self.adj)


def _local_moves(level: _Level, m2: float, resolution: float, rng: random.Random) -> tuple[list[int], bool]:
    n = len(level)
    comm = list(range(n))
    tot = list(level.k)
    order = list(range(n))
    rng.shuffle(order)
    moved_any = False
    while True:
        moved = False
        for i in order:
            ci = comm[i]
            ki = level.k[i]
            links: dict[int, float] = {}
            for j, w in level.adj[i].items():
                cj = comm[j]
                links[cj] = links.get(cj, 0.0) + w
            tot[ci] -= ki
            best = ci
            best_gain = links.get(ci, 0.0) - resolution * tot[ci] * ki / m2
            for c, w in links.items():
                gain = w - resolution * tot[c] * ki / m2
                if gain > best_gain + _EPS:
                    best, best_gain = c, gain
            tot[best] += ki
            if best != ci:
                comm[i] = best
                moved = moved_any = True
        if not moved:
            return comm, moved_any


def _aggregate(level: _Level, comm: list[int]) -> tuple[_Level, list[int]]:
    relabel: dict[int, int] = {}
    for c in comm:
        relabel.setdefault(c, len(relabel))
    dense = [relabel[c] for c in comm]
    k = len(relabel)
    adj: list[dict[int, float]] = [{} for _ in range(k)]
    loops = [0.0] * k
    for i, nbrs in enumerate(level.adj):
        ci = dense[i]
        loops[ci] += level.loops[i]
        for j, w in nbrs.items():
            cj = dense[j]
            if ci == cj:
                loops[ci] += w
            else:
                adj[ci][cj] = adj[ci].get(cj, 0.0) + w
    return _Level(adj, loops), dense


def louvain(g: WeightedGraph, resolution: float = 1.0, seed: int = 0) -> Partition:
    """Two-phase Louvain: greedy local moves, then community aggregation.

    Node visit order at every level is shuffled with ``random.Random(seed)``,
    so equal inputs give equal partitions.
    """
    nodes = list(g.nodes)
    if not g.edges:
        return Partition.from_labels({n: i for i, n in enumerate(nodes)}, degenerate=True)
    index = {n: i for i, n in enumerate(nodes)}
    adj: list[dict[int, float]] = [{} for _ in nodes]
    for (u, v), w in g.edges.items():
        adj[index[u]][index[v]] = w
        adj[index[v]][index[u]] = w
    level = _Level(adj, [0.0] * len(nodes))
    m2 = sum(level.k)
    rng = random.Random(seed)
    membership = list(range(len(nodes)))
    history: list[float] = []
    while True:
        comm, moved = _local_moves(level, m2, resolution, rng)
        if not moved:
            break
        level, dense = _aggregate(level, comm)
        membership = [dense[c] for c in membership]
        part = Partition.from_labels(dict(zip(nodes, membership)))
        history.append(modularity(g, part, resolution))
    labels = dict(zip(nodes, membership))
    if not history:
        history.append(modularity(g, Partition.from_labels(labels), resolution))
    return Partition.from_labels(labels, history=tuple(history))


def write_partition(p: Partition, path) -> None:
    lines = [f"{node} {c}" for node, c in sorted(p.assignment.items())]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_partition(path) -> Partition:
    labels = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'node community'")
        labels[parts[0]] = int(parts[1])
    return Partition.from_labels(labels)
