"""B- and D-maneuver scoring from lexicon cues and network position.

Each maneuver score is a weighted mean of binary indicators computed per
tweet; agent profiles average those scores over the agent's tweets.
"""

from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass, field, fields
from datetime import datetime
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from .community import louvain
from .corpus import HASHTAG_RE, MENTION_RE, URL_RE, Corpus, Tweet
from .graph import build_communication_network

CATEGORIES = (
    "encouragement",
    "positive_emotion",
    "negative_emotion",
    "belittling",
    "unimportance",
    "doubt_equivocal",
    "join_invitation",
    "joint_activity",
    "rhetorical",
)

MANEUVERS = ("back", "build", "bridge", "boost", "dismay", "dismiss", "distort", "distract")

# Indicator count per maneuver, in the order evaluated by maneuver_indicators.
INDICATOR_COUNTS = {
    "back": 2, "build": 3, "bridge": 2, "boost": 3,
    "dismay": 1, "dismiss": 2, "distort": 2, "distract": 2,
}

NEGATIVE_EMOJI = (
    "\U0001F620", "\U0001F621", "\U0001F92C", "\U0001F622", "\U0001F62D",
    "\U0001F494", "\U0001F44E", "\U0001F624", "\U0001F61E", "\U0001F614",
    "☹", "\U0001F641", "\U0001F625", "\U0001F628", "\U0001F631",
)
NEGATIVE_EMOTICONS = (">:(", ":'(", ":-(", ":(")

_TOKEN_RE = re.compile(r"[^\W_]+")


class LexiconError(ValueError):
    def __init__(self, message: str, lineno: int = 0):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


@dataclass(frozen=True)
class Lexicon:
    entries: dict[str, str]

    def terms(self, category: str) -> list[str]:
        return sorted(t for t, c in self.entries.items() if c == category)

    def populated_categories(self) -> set[str]:
        return set(self.entries.values())


def load_lexicon(path) -> Lexicon:
    """Parse ``term,category`` lines; ``#`` starts a comment."""
    entries: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2 or not parts[0]:
            raise LexiconError(f"expected 'term,category', got {raw!r}", lineno)
        term, category = parts[0].lower(), parts[1]
        if category not in CATEGORIES:
            raise LexiconError(f"unknown category {category!r}", lineno)
        if not _TOKEN_RE.fullmatch(term):
            raise LexiconError(f"term {term!r} is not a single token", lineno)
        if term in entries:
            raise LexiconError(f"duplicate term {term!r}", lineno)
        entries[term] = category
    return Lexicon(entries)


def default_lexicon() -> Lexicon:
    with resources.as_file(resources.files("hashtrace") / "data" / "lexicon_id.csv") as p:
        return load_lexicon(p)


def cue_tokens(text: str) -> list[str]:
    """Lowercased word tokens with URLs, hashtags and mentions removed."""
    text = URL_RE.sub(" ", text)
    text = HASHTAG_RE.sub(" ", text)
    text = MENTION_RE.sub(" ", text)
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class CueVector:
    counts: dict[str, int]
    question_marks: int = 0
    exclamations: int = 0
    negative_emoji: int = 0

    def __getitem__(self, category: str) -> int:
        return self.counts.get(category, 0)


def count_negative_emoji(text: str) -> int:
    n = sum(text.count(e) for e in NEGATIVE_EMOJI)
    rest = text
    for emoticon in NEGATIVE_EMOTICONS:
        n += rest.count(emoticon)
        rest = rest.replace(emoticon, " ")
    return n


def extract_cues(tweet: Tweet, lex: Lexicon) -> CueVector:
    counts = Counter(lex.entries[tok] for tok in cue_tokens(tweet.text) if tok in lex.entries)
    return CueVector(
        counts={c: counts.get(c, 0) for c in CATEGORIES},
        question_marks=tweet.text.count("?"),
        exclamations=tweet.text.count("!"),
        negative_emoji=count_negative_emoji(tweet.text),
    )


def identify_opinion_leaders(corpus: Corpus, percentile: float = 0.90) -> set[str]:
    """Agents whose follower count reaches the given quantile (linear interpolation)."""
    if not 0 <= percentile <= 1:
        raise ValueError("percentile must be in [0, 1]")
    known = {a.id: a.followers_count for a in corpus.agents.values() if a.followers_count is not None}
    if not known:
        raise ValueError("no agent carries follower metadata")
    cut = float(np.quantile(np.array(list(known.values()), dtype=float), percentile))
    return {a for a, f in known.items() if f >= cut}


@dataclass(frozen=True)
class ManeuverScores:
    back: float = 0.0
    build: float = 0.0
    bridge: float = 0.0
    boost: float = 0.0
    dismay: float = 0.0
    dismiss: float = 0.0
    distort: float = 0.0
    distract: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def mean(cls, items: list["ManeuverScores"]) -> "ManeuverScores":
        if not items:
            raise ValueError("mean of no scores")
        return cls(**{m: sum(getattr(s, m) for s in items) / len(items) for m in MANEUVERS})


@dataclass(frozen=True)
class FirstUse:
    created_at: datetime
    tweet_id: str
    agent: str


@dataclass
class ManeuverContext:
    opinion_leaders: set[str]
    agent_community: dict[str, int]
    hashtag_first_use: dict[str, FirstUse]
    hashtag_majority_community: dict[str, int]
    lexicon: Lexicon
    weights: dict[str, tuple[float, ...]] = field(default_factory=dict)
    _scores: dict[str, ManeuverScores] = field(default_factory=dict, repr=False)

    def weights_for(self, maneuver: str) -> tuple[float, ...]:
        return self.weights.get(maneuver) or (1.0,) * INDICATOR_COUNTS[maneuver]


def validate_weights(weights: Mapping[str, Iterable[float]]) -> dict[str, tuple[float, ...]]:
    out = {}
    for name, ws in weights.items():
        if name not in INDICATOR_COUNTS:
            raise ValueError(f"unknown maneuver {name!r}")
        ws = tuple(float(w) for w in ws)
        if len(ws) != INDICATOR_COUNTS[name]:
            raise ValueError(f"{name} takes {INDICATOR_COUNTS[name]} weights, got {len(ws)}")
        if any(w < 0 for w in ws) or sum(ws) <= 0:
            raise ValueError(f"{name} weights must be non-negative with a positive sum")
        out[name] = ws
    return out


def hashtag_first_use(corpus: Corpus) -> dict[str, FirstUse]:
    """Earliest use of every tag; simultaneous uses resolve to the smaller tweet id."""
    first: dict[str, FirstUse] = {}
    for tweet in sorted(corpus.tweets, key=lambda t: (t.created_at, t.id)):
        for tag in tweet.hashtags:
            if tag not in first:
                first[tag] = FirstUse(tweet.created_at, tweet.id, tweet.author_id)
    return first


def hashtag_majority_community(corpus: Corpus, agent_community: Mapping[str, int]) -> dict[str, int]:
    """Community holding most distinct users of each tag (ties: smallest id)."""
    users: dict[str, set[str]] = {}
    for tweet in corpus.tweets:
        for tag in tweet.hashtags:
            users.setdefault(tag, set()).add(tweet.author_id)
    out = {}
    for tag, who in users.items():
        counts = Counter(agent_community[a] for a in who if a in agent_community)
        if counts:
            out[tag] = min(counts, key=lambda c: (-counts[c], c))
    return out


def build_context(
    corpus: Corpus,
    lexicon: Optional[Lexicon] = None,
    leader_percentile: float = 0.90,
    community_corpus: Optional[Corpus] = None,
    resolution: float = 1.0,
    seed: int = 0,
    weights: Optional[Mapping[str, Iterable[float]]] = None,
) -> ManeuverContext:
    """Assemble leaders, Louvain communities and hashtag history for scoring.

    Communities come from the communication network of ``community_corpus``
    (the whole corpus when omitted).
    """
    lexicon = lexicon or default_lexicon()
    net = build_communication_network(community_corpus if community_corpus is not None else corpus)
    part = louvain(net, resolution=resolution, seed=seed)
    return ManeuverContext(
        opinion_leaders=identify_opinion_leaders(corpus, leader_percentile),
        agent_community=dict(part.assignment),
        hashtag_first_use=hashtag_first_use(corpus),
        hashtag_majority_community=hashtag_majority_community(corpus, part.assignment),
        lexicon=lexicon,
        weights=validate_weights(weights or {}),
    )


def maneuver_indicators(tweet: Tweet, cues: CueVector, ctx: ManeuverContext) -> dict[str, tuple[bool, ...]]:
    refs = tweet.referenced
    comm = ctx.agent_community
    own = comm.get(tweet.author_id)
    ref_comms = [comm[a] for a in refs if a in comm]
    per_comm = Counter(ref_comms)
    foreign_tag = own is not None and any(
        tag in ctx.hashtag_majority_community and ctx.hashtag_majority_community[tag] != own
        for tag in tweet.hashtags
    )
    first_tag = any(
        tag in ctx.hashtag_first_use and ctx.hashtag_first_use[tag].tweet_id == tweet.id
        for tag in tweet.hashtags
    )
    return {
        "back": (cues["encouragement"] > 0, any(a in ctx.opinion_leaders for a in refs)),
        "build": (
            len(refs) >= 2,
            cues["join_invitation"] > 0,
            own is not None and own in per_comm,
        ),
        "bridge": (len(per_comm) >= 2, foreign_tag),
        "boost": (
            len(refs) >= 3,
            cues["joint_activity"] > 0,
            any(n >= 2 for n in per_comm.values()),
        ),
        "dismay": (cues["negative_emotion"] > 0 or cues.negative_emoji > 0,),
        "dismiss": (cues["belittling"] > 0, cues["unimportance"] > 0),
        "distort": (cues["doubt_equivocal"] > 0, cues.question_marks > 0),
        "distract": (first_tag, cues["rhetorical"] > 0 or cues.exclamations > 0),
    }


def score_maneuvers(tweet: Tweet, cues: CueVector, ctx: ManeuverContext) -> ManeuverScores:
    values = {}
    for name, flags in maneuver_indicators(tweet, cues, ctx).items():
        ws = ctx.weights_for(name)
        values[name] = sum(w for w, f in zip(ws, flags) if f) / sum(ws)
    return ManeuverScores(**values)


def tweet_scores(tweet: Tweet, ctx: ManeuverContext) -> ManeuverScores:
    """Cached cue extraction plus scoring for one tweet."""
    cached = ctx._scores.get(tweet.id)
    if cached is None:
        cached = score_maneuvers(tweet, extract_cues(tweet, ctx.lexicon), ctx)
        ctx._scores[tweet.id] = cached
    return cached


def agent_tweet_scores(corpus: Corpus, ctx: ManeuverContext) -> dict[str, list[ManeuverScores]]:
    by_agent: dict[str, list[ManeuverScores]] = {}
    for tweet in corpus.tweets:
        by_agent.setdefault(tweet.author_id, []).append(tweet_scores(tweet, ctx))
    return by_agent


def agent_maneuver_profile(agent: str, corpus: Corpus, ctx: ManeuverContext) -> ManeuverScores:
    scores = [tweet_scores(t, ctx) for t in corpus.tweets if t.author_id == agent]
    if not scores:
        raise ValueError(f"agent {agent!r} authored no tweets")
    return ManeuverScores.mean(scores)


@dataclass(frozen=True)
class GroupComparison:
    labels: tuple[str, str]
    mean_a: ManeuverScores
    mean_b: ManeuverScores
    sizes: tuple[int, int]

    def difference(self, maneuver: str) -> float:
        return getattr(self.mean_a, maneuver) - getattr(self.mean_b, maneuver)

    def rows(self) -> list[list[str]]:
        a, b = self.labels
        out = [["maneuver", a, b, "difference"]]
        for m in MANEUVERS:
            out.append([m, f"{getattr(self.mean_a, m):.6f}", f"{getattr(self.mean_b, m):.6f}",
                        f"{self.difference(m):.6f}"])
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(self.rows())


def compare_groups(
    group_a: Iterable[str],
    group_b: Iterable[str],
    corpus: Corpus,
    ctx: ManeuverContext,
    labels: tuple[str, str] = ("group_a", "group_b"),
) -> GroupComparison:
    """Mean of agent profiles per group. Agents without tweets are skipped."""
    a, b = set(group_a), set(group_b)
    if a & b:
        raise ValueError(f"groups overlap on {sorted(a & b)[:5]}")
    if not a or not b:
        raise ValueError("both groups must be non-empty")
    by_agent = agent_tweet_scores(corpus, ctx)
    prof_a = [ManeuverScores.mean(by_agent[x]) for x in sorted(a) if x in by_agent]
    prof_b = [ManeuverScores.mean(by_agent[x]) for x in sorted(b) if x in by_agent]
    if not prof_a or not prof_b:
        raise ValueError("a group has no agent with tweets")
    return GroupComparison(labels, ManeuverScores.mean(prof_a), ManeuverScores.mean(prof_b),
                           (len(prof_a), len(prof_b)))
