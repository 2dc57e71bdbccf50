"""Who the coordinated agents addressed, and what those targets look like."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .bend import MANEUVERS, ManeuverContext, ManeuverScores, agent_tweet_scores
from .corpus import Corpus
from .graph import WeightedGraph, centralities

ATTRIBUTES = (
    "verified",
    "bot_probability",
    "followers",
    "following",
    "betweenness",
    "eigenvector",
    "total_degree",
)


class UndefinedCorrelation(ValueError):
    """Pearson's r has a zero-variance argument."""


def extract_targets(corpus: Corpus, coordinated: Iterable[str]) -> set[str]:
    """Agents mentioned or retweeted by coordinated tweets, minus the coordinated."""
    coordinated = set(coordinated)
    if not coordinated:
        raise ValueError("coordinated agent set is empty")
    targets: set[str] = set()
    for tweet in corpus.tweets:
        if tweet.author_id in coordinated:
            targets.update(tweet.referenced)
    return targets - coordinated


def _ratios(scores: list[ManeuverScores], threshold: float) -> dict[str, float]:
    n = len(scores)
    return {m: sum(getattr(s, m) >= threshold for s in scores) / n for m in MANEUVERS}


def maneuver_ratio(
    agent: str, corpus: Corpus, ctx: ManeuverContext, threshold: float = 0.5
) -> dict[str, float]:
    """Share of the agent's tweets whose score reaches ``threshold``, per maneuver."""
    scores = agent_tweet_scores(corpus, ctx).get(agent)
    if not scores:
        raise ValueError(f"agent {agent!r} authored no tweets")
    return _ratios(scores, threshold)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation. Raises :class:`UndefinedCorrelation` on zero variance."""
    if len(x) != len(y):
        raise ValueError("pearson needs equal-length inputs")
    n = len(x)
    if n < 2:
        raise ValueError("pearson needs at least two observations")
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    # Relative cutoff so float noise around a constant vector counts as zero variance.
    scale_x = max(abs(v) for v in x) or 1.0
    scale_y = max(abs(v) for v in y) or 1.0
    if sxx <= (1e-12 * scale_x) ** 2 * n or syy <= (1e-12 * scale_y) ** 2 * n:
        raise UndefinedCorrelation("zero variance")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class TargetProfile:
    agent: str
    maneuvers: dict[str, float]
    attributes: dict[str, Optional[float]]


@dataclass(frozen=True)
class CorrelationEntry:
    r: Optional[float]
    n: int
    note: str = ""


@dataclass
class CorrelationTable:
    entries: dict[tuple[str, str], CorrelationEntry]
    mode: str
    profiles: list[TargetProfile] = field(default_factory=list, repr=False)
    dropped: list[str] = field(default_factory=list)

    def r(self, maneuver: str, attribute: str) -> Optional[float]:
        return self.entries[(maneuver, attribute)].r

    def matrix_rows(self) -> list[list[str]]:
        out = [["maneuver", *ATTRIBUTES]]
        for m in MANEUVERS:
            row = [m]
            for a in ATTRIBUTES:
                e = self.entries[(m, a)]
                row.append("" if e.r is None else f"{e.r:.6f}")
            out.append(row)
        return out

    def long_rows(self) -> list[list[str]]:
        out = [["maneuver", "attribute", "r", "n", "note"]]
        for m in MANEUVERS:
            for a in ATTRIBUTES:
                e = self.entries[(m, a)]
                out.append([m, a, "" if e.r is None else f"{e.r:.6f}", str(e.n), e.note])
        return out

    def write(self, matrix_path, long_path) -> None:
        for path, rows in ((matrix_path, self.matrix_rows()), (long_path, self.long_rows())):
            with open(path, "w", newline="", encoding="utf-8") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)


def target_profiles(
    targets: Iterable[str],
    corpus: Corpus,
    ctx: ManeuverContext,
    network: WeightedGraph,
    mode: str = "ratio",
    threshold: float = 0.5,
) -> tuple[list[TargetProfile], list[str]]:
    """Profiles for targets that tweeted; the rest are returned as dropped."""
    if mode not in ("ratio", "mean"):
        raise ValueError(f"mode must be 'ratio' or 'mean', got {mode!r}")
    by_agent = agent_tweet_scores(corpus, ctx)
    cent = centralities(network)
    profiles, dropped = [], []
    for agent in sorted(targets):
        scores = by_agent.get(agent)
        if not scores:
            dropped.append(agent)
            continue
        if mode == "ratio":
            values = _ratios(scores, threshold)
        else:
            values = ManeuverScores.mean(scores).as_dict()
        meta = corpus.agents[agent]
        attrs = {
            "verified": None if meta.verified is None else float(meta.verified),
            "bot_probability": meta.bot_probability,
            "followers": None if meta.followers_count is None else float(meta.followers_count),
            "following": None if meta.following_count is None else float(meta.following_count),
            "betweenness": cent.betweenness.get(agent),
            "eigenvector": cent.eigenvector.get(agent),
            "total_degree": cent.total_degree.get(agent),
        }
        profiles.append(TargetProfile(agent, values, attrs))
    return profiles, dropped


def correlation_table(
    targets: Iterable[str],
    corpus: Corpus,
    ctx: ManeuverContext,
    network: WeightedGraph,
    mode: str = "ratio",
    threshold: float = 0.5,
) -> CorrelationTable:
    """Pearson r of each maneuver against each target attribute.

    Targets missing an attribute are left out of that attribute's pairs only.
    """
    profiles, dropped = target_profiles(targets, corpus, ctx, network, mode, threshold)
    if len(profiles) < 2:
        raise ValueError(f"need at least 2 targets with tweets, have {len(profiles)}")
    entries = {}
    for m in MANEUVERS:
        for a in ATTRIBUTES:
            pairs = [(p.maneuvers[m], p.attributes[a]) for p in profiles if p.attributes[a] is not None]
            n = len(pairs)
            if n < 2:
                entries[(m, a)] = CorrelationEntry(None, n, "insufficient sample")
                continue
            xs, ys = zip(*pairs)
            try:
                entries[(m, a)] = CorrelationEntry(pearson(xs, ys), n)
            except UndefinedCorrelation:
                entries[(m, a)] = CorrelationEntry(None, n, "zero variance")
    return CorrelationTable(entries=entries, mode=mode, profiles=profiles, dropped=dropped)
