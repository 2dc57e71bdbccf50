"""Discovery of hijack hashtags, coordinated agents and their tweet bursts."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Optional

from .community import Partition, louvain
from .corpus import Corpus, day_window
from .graph import WeightedGraph, build_hashtag_cooccurrence

_ALNUM = frozenset("abcdefghijklmnopqrstuvwxyz0123456789")
_DIGITS = frozenset("0123456789")


def is_anomalous_hashtag(tag: str) -> bool:
    """Four lowercase alphanumerics with at least one digit (e.g. ``dup6``)."""
    return len(tag) == 4 and set(tag) <= _ALNUM and bool(set(tag) & _DIGITS)


@dataclass
class DiscoveryResult:
    anomalous_hashtags: set[str]
    flagged_clusters: dict[int, float]
    coordinated_agents: set[str]
    per_agent_evidence: dict[str, list[tuple[str, tuple[str, ...]]]]
    hashtag_graph: Optional[WeightedGraph] = field(default=None, repr=False)
    hashtag_partition: Optional[Partition] = field(default=None, repr=False)

    def to_record(self) -> dict:
        clusters = {}
        if self.hashtag_partition is not None:
            members = self.hashtag_partition.communities()
            clusters = {
                str(c): {"fraction": frac, "hashtags": sorted(members[c])}
                for c, frac in sorted(self.flagged_clusters.items())
            }
        return {
            "anomalous_hashtags": sorted(self.anomalous_hashtags),
            "flagged_clusters": clusters,
            "coordinated_agents": {
                agent: {
                    "evidence_count": len(ev),
                    "tweets": [{"id": tid, "hashtags": list(tags)} for tid, tags in ev],
                }
                for agent, ev in sorted(self.per_agent_evidence.items())
            },
        }


def flag_coordination_clusters(
    hashtag_graph: WeightedGraph,
    p: Partition,
    min_fraction: float = 0.5,
    min_size: int = 3,
) -> dict[int, float]:
    """Clusters of at least ``min_size`` tags whose anomalous share reaches ``min_fraction``."""
    flagged = {}
    for cid, members in enumerate(p.communities()):
        members &= set(hashtag_graph.nodes)
        if len(members) < min_size:
            continue
        frac = sum(is_anomalous_hashtag(t) for t in members) / len(members)
        if frac >= min_fraction:
            flagged[cid] = frac
    return flagged


def extract_coordinated_agents(
    corpus: Corpus,
    discovery_days: int = 3,
    min_fraction: float = 0.5,
    min_size: int = 3,
    resolution: float = 1.0,
    seed: int = 0,
) -> DiscoveryResult:
    """Authors of any tweet carrying an anomalous hashtag.

    Hashtag clusters are built from the first ``discovery_days`` days only
    and are reported alongside; they do not gate agent extraction.
    """
    evidence: dict[str, list[tuple[str, tuple[str, ...]]]] = {}
    anomalous: set[str] = set()
    for tweet in corpus.tweets:
        tags = tuple(dict.fromkeys(t for t in tweet.hashtags if is_anomalous_hashtag(t)))
        if tags:
            anomalous.update(tags)
            evidence.setdefault(tweet.author_id, []).append((tweet.id, tags))

    head = day_window(corpus, 0, discovery_days)
    hgraph = build_hashtag_cooccurrence(head)
    flagged: dict[int, float] = {}
    part: Optional[Partition] = None
    if hgraph.nodes:
        part = louvain(hgraph, resolution=resolution, seed=seed)
        flagged = flag_coordination_clusters(hgraph, part, min_fraction, min_size)
        discovered = {t: is_anomalous_hashtag(t) for t in hgraph.nodes}
        hgraph = hgraph.with_attrs("community", part.assignment).with_attrs("discovered", discovered)

    return DiscoveryResult(
        anomalous_hashtags=anomalous,
        flagged_clusters=flagged,
        coordinated_agents=set(evidence),
        per_agent_evidence=dict(sorted(evidence.items())),
        hashtag_graph=hgraph,
        hashtag_partition=part,
    )


def write_discovery_report(result: DiscoveryResult, path) -> None:
    Path(path).write_text(json.dumps(result.to_record(), indent=2) + "\n", encoding="utf-8")


def read_discovery_report(path) -> DiscoveryResult:
    record = json.loads(Path(path).read_text(encoding="utf-8"))
    evidence = {
        agent: [(t["id"], tuple(t["hashtags"])) for t in info["tweets"]]
        for agent, info in record["coordinated_agents"].items()
    }
    return DiscoveryResult(
        anomalous_hashtags=set(record["anomalous_hashtags"]),
        flagged_clusters={int(c): v["fraction"] for c, v in record["flagged_clusters"].items()},
        coordinated_agents=set(evidence),
        per_agent_evidence=evidence,
    )


def recurring_agents(result_a: DiscoveryResult, result_b: DiscoveryResult) -> set[str]:
    return result_a.coordinated_agents & result_b.coordinated_agents


@dataclass(frozen=True)
class BurstProfile:
    per_day_counts: dict[date, int]
    peak_fraction: float

    @property
    def total(self) -> int:
        return sum(self.per_day_counts.values())

    @property
    def peak_day(self) -> date:
        return max(sorted(self.per_day_counts), key=self.per_day_counts.__getitem__)


def burst_concentration(corpus: Corpus, agents: Iterable[str]) -> BurstProfile:
    """Daily (UTC) tweet counts of ``agents`` over the corpus span, and the peak-day share."""
    agents = set(agents)
    if not agents:
        raise ValueError("burst profile needs at least one agent")
    counts = Counter(t.created_at.date() for t in corpus.tweets if t.author_id in agents)
    total = sum(counts.values())
    if total == 0:
        raise ValueError("the given agents authored no tweets; burst profile is empty")
    per_day = {day: counts.get(day, 0) for day in corpus.days()}
    return BurstProfile(per_day_counts=per_day, peak_fraction=max(counts.values()) / total)


def write_burst_csv(profiles: dict[str, BurstProfile], path) -> None:
    days = sorted({d for p in profiles.values() for d in p.per_day_counts})
    lines = ["group,peak_fraction," + ",".join(d.isoformat() for d in days)]
    for name, prof in profiles.items():
        counts = ",".join(str(prof.per_day_counts.get(d, 0)) for d in days)
        lines.append(f"{name},{prof.peak_fraction:.6f},{counts}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
