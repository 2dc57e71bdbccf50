"""Krackhardt E/I index of subgroups before and after coordinated activity."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Optional

from .community import louvain
from .corpus import Corpus, day_window, num_days, window, without_authors
from .graph import WeightedGraph, build_communication_network


class UndefinedEI(ValueError):
    """The subgroup has neither internal nor external links."""


def link_counts(g: WeightedGraph, subgroup: Iterable[str], weighted: bool = False) -> tuple[float, float]:
    """``(internal, external)`` links of ``subgroup``; edge weights summed when ``weighted``."""
    members = set(subgroup)
    unknown = members - set(g.nodes)
    if unknown:
        raise ValueError(f"subgroup has nodes not in graph: {sorted(unknown)[:5]}")
    internal = external = 0.0
    for (u, v), w in g.edges.items():
        inside = (u in members) + (v in members)
        if inside == 0:
            continue
        amount = w if weighted else 1.0
        if inside == 2:
            internal += amount
        else:
            external += amount
    return internal, external


def ei_from_counts(internal: float, external: float) -> float:
    if internal + external == 0:
        raise UndefinedEI("subgroup has no links")
    return (external - internal) / (external + internal)


def ei_index(g: WeightedGraph, subgroup: Iterable[str], weighted: bool = False) -> float:
    """(EL - IL) / (EL + IL) for a node subset."""
    return ei_from_counts(*link_counts(g, subgroup, weighted))


@dataclass(frozen=True)
class SubgroupEI:
    subgroup: int
    size: int
    internal: float
    external: float
    ei: Optional[float]
    baseline_size: int
    baseline_internal: float
    baseline_external: float
    baseline_ei: Optional[float]
    theme: Optional[int] = None
    note: str = ""
    members: frozenset = field(default=frozenset(), repr=False, compare=False)


@dataclass
class EIReport:
    rows: list[SubgroupEI]
    baseline_ei: Optional[float]
    baseline_internal: float
    baseline_external: float
    weighted: bool = False
    settings: dict = field(default_factory=dict)

    def table_rows(self, min_size: int = 1) -> list[list[str]]:
        def fmt(x):
            return "" if x is None else f"{x:.3f}"

        out = [["subgroup", "theme", "size", "IL", "EL", "ei",
                "baseline_size", "baseline_IL", "baseline_EL", "baseline_ei", "note"]]
        out.append(["before", "", "", f"{self.baseline_internal:g}", f"{self.baseline_external:g}",
                    fmt(self.baseline_ei), "", "", "", "", "pooled over subgroups"])
        for r in self.rows:
            if r.size < min_size:
                continue
            out.append([
                str(r.subgroup), "" if r.theme is None else str(r.theme), str(r.size),
                f"{r.internal:g}", f"{r.external:g}", fmt(r.ei),
                str(r.baseline_size), f"{r.baseline_internal:g}", f"{r.baseline_external:g}",
                fmt(r.baseline_ei), r.note,
            ])
        return out

    def write_csv(self, path, min_size: int = 1) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(self.table_rows(min_size))


Window = tuple[datetime, datetime]


def default_windows(corpus: Corpus, discovered: Iterable[str], days: int = 3) -> tuple[Corpus, Corpus]:
    """Pre: the first ``days`` days without discovered agents' tweets. Post: the last ``days`` days."""
    pre = without_authors(day_window(corpus, 0, days), discovered)
    post = day_window(corpus, max(0, num_days(corpus) - days), days)
    return pre, post


def polarization_report(
    corpus: Corpus,
    discovered: Iterable[str],
    pre_window: Optional[Window] = None,
    post_window: Optional[Window] = None,
    seed: int = 0,
    resolution: float = 1.0,
    weighted: bool = False,
    themes: Optional[dict[int, int]] = None,
    days: int = 3,
) -> EIReport:
    """E/I of Louvain subgroups of the post-activity network, projected back onto the pre network.

    Windows are half-open ``(start, end)`` pairs; see :func:`default_windows`
    for what an omitted window means. An explicit pre window still excludes
    the discovered agents' tweets. Only agents with at least one link count
    as subgroup members, in either network.
    """
    discovered = set(discovered)
    default_pre, default_post = default_windows(corpus, discovered, days)
    pre = default_pre if pre_window is None else without_authors(window(corpus, *pre_window), discovered)
    post = default_post if post_window is None else window(corpus, *post_window)
    if pre.is_empty or post.is_empty:
        raise ValueError("both windows must contain tweets")
    post_net = build_communication_network(post)
    post_net = post_net.subgraph(n for n in post_net.nodes if post_net.adjacency[n])
    pre_net = build_communication_network(pre)
    pre_net = pre_net.subgraph(n for n in pre_net.nodes if pre_net.adjacency[n])
    if not post_net.edges:
        raise ValueError("post-activity window has no communication links")
    part = louvain(post_net, resolution=resolution, seed=seed)
    pre_nodes = set(pre_net.nodes)

    rows = []
    pooled_in = pooled_ex = 0.0
    for cid, members in enumerate(part.communities()):
        il, el = link_counts(post_net, members, weighted)
        present = members & pre_nodes
        note = ""
        b_il = b_el = 0.0
        b_ei = None
        if present:
            b_il, b_el = link_counts(pre_net, present, weighted)
            if b_il + b_el > 0:
                b_ei = ei_from_counts(b_il, b_el)
            pooled_in += b_il
            pooled_ex += b_el
        else:
            note = "baseline not computable: subgroup absent before activity"
        rows.append(SubgroupEI(
            subgroup=cid, size=len(members), internal=il, external=el,
            ei=ei_from_counts(il, el), baseline_size=len(present), baseline_internal=b_il,
            baseline_external=b_el, baseline_ei=b_ei,
            theme=(themes or {}).get(cid), note=note, members=frozenset(members),
        ))
    pooled = ei_from_counts(pooled_in, pooled_ex) if pooled_in + pooled_ex > 0 else None
    return EIReport(rows=rows, baseline_ei=pooled, baseline_internal=pooled_in,
                    baseline_external=pooled_ex, weighted=weighted,
                    settings={"resolution": resolution, "seed": seed, "days": days,
                              "pre_tweets": len(pre.tweets), "post_tweets": len(post.tweets)})
