"""Synthetic hashtag-hijacking campaigns with ground-truth labels.

A scenario has organic agents split into topic communities, a handful of
high-follower influencers, and a coordinated group posting templated
messages tagged with random 4-character hashtags, mostly on one day.
Organic agents mix freely across communities before ``polarization_day``
and mostly talk within their own community afterwards.
"""

from __future__ import annotations

import hashlib
import json
import math
import string
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import yaml

from .corpus import Agent, Tweet, build_corpus, format_timestamp, serialize_tweet
from .discovery import is_anomalous_hashtag

DEFAULT_VOCABULARIES = [
    [
        "palestina", "israel", "gaza", "donasi", "kemanusiaan", "saudara", "rakyat",
        "tanah", "rumah", "perdamaian", "diplomasi", "gencatan", "senjata", "pemerintah",
        "pernyataan", "sikap", "bantuan", "korban", "anakanak", "doakan", "masjid",
        "aqsa", "yerusalem", "konflik", "serangan", "roket", "pengungsi", "dunia",
        "internasional", "pbb", "resolusi", "solidaritas", "menlu", "negara", "warga",
        "berita", "laporan", "kemarin", "malam", "pagi",
    ],
    [
        "miras", "investasi", "perpres", "industri", "alkohol", "presiden", "izin",
        "daerah", "papua", "generasi", "mabuk", "haram", "saham", "pabrik", "minuman",
        "keras", "legal", "dilegalkan", "kebijakan", "cabut", "dicabut", "regulasi",
        "ekonomi", "pajak", "lapangan", "kerja", "pejabat", "dpr", "ormas", "ulama",
        "fatwa", "tokoh", "bali", "ntt", "sulut", "wisata", "lokal", "tradisi",
        "budaya", "diskusi",
    ],
]

DEFAULT_HASHTAG_POOLS = [
    ["palestina", "savepalestine", "freepalestine", "aqsacallsarmies", "gazaunderattack", "bebaskanpalestina"],
    ["batalkanperpresmiras", "papuatolakinvestasimiras", "miraspangkalsejutamaksiat",
     "mirasindukmaksiat", "tolakmiras", "perpresmiras"],
]

DEFAULT_TEMPLATES = [
    "{time}, {greeting} saya melihat di kota {city} sudah banyak orang yang sadar khilafah, kamu gimana {mentions}",
    "Ayo {mentions} gabung bersama dakwah khilafah di {city}! Semangat!",
    "{greeting}, {time} makin banyak yang ikutan sadar khilafah. Mari dukung {mentions}!",
    "Wahai umat, saatnya bersatu untuk khilafah! {mentions} ayo ramaikan {time}",
]

TEMPLATE_TIMES = ["Pagi ini", "Siang ini", "Malam ini", "Hari ini", "Minggu ini", "Bulan ini"]
TEMPLATE_GREETINGS = ["Alhamdulillah", "MasyaAllah"]
TEMPLATE_CITIES = ["Jakarta", "Bandung", "Surabaya", "Medan", "Makassar", "Yogyakarta"]

# Cue words sprinkled into organic text at a low rate; all are lexicon terms.
ORGANIC_CUES = {
    "encouragement": ["semangat", "dukung"],
    "negative_emotion": ["sedih", "marah"],
    "belittling": ["payah"],
    "unimportance": ["cuma"],
    "doubt_equivocal": ["katanya", "mungkin"],
    "join_invitation": ["ikuti"],
    "joint_activity": ["bersama"],
    "rhetorical": ["saatnya"],
}
INFLUENCER_PHRASES = ["Ayo semangat", "Mari dukung", "Semangat terus", "Ayo bela"]


@dataclass
class CampaignConfig:
    n_organic_agents: int = 1000
    n_coordinated_agents: int = 60
    n_influencers: int = 5
    n_days: int = 6
    start_date: str = "2021-05-14"
    organic_tweets_per_day: float = 2.0
    influencer_tweets_per_day: float = 3.0
    coordinated_tweets_min: int = 3
    coordinated_tweets_max: int = 6
    burst_day: int = 1
    burst_fraction: float = 0.8
    polarization_day: int = 3
    pre_cross_group_prob: float = 1 / 3
    post_cross_group_prob: float = 0.05
    organic_mention_weights: list = field(default_factory=lambda: [0.3, 0.5, 0.2])
    organic_influencer_mention_prob: float = 0.05
    organic_retweet_prob: float = 0.15
    organic_hashtag_prob: float = 0.4
    organic_cue_prob: float = 0.03
    organic_words_min: int = 6
    organic_words_max: int = 12
    organic_topic_vocabularies: list = field(default_factory=lambda: [list(v) for v in DEFAULT_VOCABULARIES])
    organic_hashtag_pools: list = field(default_factory=lambda: [list(p) for p in DEFAULT_HASHTAG_POOLS])
    coordinated_templates: list = field(default_factory=lambda: list(DEFAULT_TEMPLATES))
    n_anomalous_hashtags: int = 12
    coordinated_peer_mention_prob: float = 0.7
    coordinated_organic_mention_prob: float = 0.3
    bot_fraction_coordinated: float = 0.23
    bot_fraction_organic: float = 0.21
    influencer_follower_multiplier: float = 100.0
    coordinated_id_start: int = 0
    id_prefix: str = ""
    seed: int = 7

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown campaign config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "CampaignConfig":
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def dump(self, path) -> None:
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=False, allow_unicode=True),
                              encoding="utf-8")


def validate_config(config: CampaignConfig) -> list[str]:
    """All violated invariants as messages; an empty list means the config is usable."""
    errors = []
    for name in ("n_organic_agents", "n_coordinated_agents", "n_influencers", "n_days"):
        if getattr(config, name) <= 0:
            errors.append(f"{name} must be positive")
    if not 0 <= config.burst_day < max(config.n_days, 1):
        errors.append("burst_day must be in [0, n_days)")
    if not 0 < config.burst_fraction <= 1:
        errors.append("burst_fraction must be in (0, 1]")
    if not 0 <= config.polarization_day <= config.n_days:
        errors.append("polarization_day must be in [0, n_days]")
    for name in ("pre_cross_group_prob", "post_cross_group_prob", "organic_influencer_mention_prob",
                 "organic_retweet_prob", "organic_hashtag_prob", "organic_cue_prob",
                 "coordinated_peer_mention_prob", "coordinated_organic_mention_prob",
                 "bot_fraction_coordinated", "bot_fraction_organic"):
        if not 0 <= getattr(config, name) <= 1:
            errors.append(f"{name} must be in [0, 1]")
    if config.organic_tweets_per_day <= 0 or config.influencer_tweets_per_day < 0:
        errors.append("tweet rates must be positive")
    if not 1 <= config.coordinated_tweets_min <= config.coordinated_tweets_max:
        errors.append("need 1 <= coordinated_tweets_min <= coordinated_tweets_max")
    if not 1 <= config.organic_words_min <= config.organic_words_max:
        errors.append("need 1 <= organic_words_min <= organic_words_max")
    weights = config.organic_mention_weights
    if not weights or any(w < 0 for w in weights) or sum(weights) <= 0:
        errors.append("organic_mention_weights must be non-negative with a positive sum")

    vocabs = config.organic_topic_vocabularies
    if len(vocabs) < 2:
        errors.append("need at least 2 organic topic vocabularies")
    if any(not v for v in vocabs):
        errors.append("topic vocabularies must be non-empty")
    seen: dict[str, int] = {}
    for i, vocab in enumerate(vocabs):
        for word in set(vocab):
            if word in seen:
                errors.append(f"word {word!r} appears in vocabularies {seen[word]} and {i}")
            seen[word] = i
    pools = config.organic_hashtag_pools
    if len(pools) != len(vocabs):
        errors.append("need one hashtag pool per topic vocabulary")
    if any(not p for p in pools):
        errors.append("hashtag pools must be non-empty")
    for pool in pools:
        for tag in pool:
            if tag != tag.lower() or not tag.isalnum():
                errors.append(f"pool hashtag {tag!r} must be lowercase alphanumeric")
            elif is_anomalous_hashtag(tag):
                errors.append(f"pool hashtag {tag!r} looks like a hijack marker")
    if not config.coordinated_templates:
        errors.append("need at least one coordinated template")
    for tpl in config.coordinated_templates:
        if "{mentions}" not in tpl:
            errors.append(f"template lacks a {{mentions}} slot: {tpl!r}")
    if not 1 <= config.n_anomalous_hashtags <= 10000:
        errors.append("n_anomalous_hashtags must be in [1, 10000]")
    if config.influencer_follower_multiplier <= 1:
        errors.append("influencer_follower_multiplier must exceed 1")
    if config.coordinated_id_start < 0:
        errors.append("coordinated_id_start must be non-negative")
    try:
        datetime.strptime(config.start_date, "%Y-%m-%d")
    except ValueError:
        errors.append(f"start_date {config.start_date!r} is not YYYY-MM-DD")
    return errors


def config_warnings(config: CampaignConfig) -> list[str]:
    warnings = []
    if config.n_days == 1:
        warnings.append("n_days = 1: burst concentration is trivially 1 for every group")
    if config.n_coordinated_agents < 5:
        warnings.append("fewer than 5 coordinated agents: group statistics are noisy")
    if config.polarization_day in (0, config.n_days):
        warnings.append("polarization_day at a boundary: no pre/post contrast is planted")
    return warnings


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("invalid campaign config: " + "; ".join(errors))


@dataclass
class GroundTruth:
    coordinated: list[str]
    influencers: list[str]
    organic: list[str]
    bots: dict[str, bool]
    agent_topic: dict[str, int]
    tweet_labels: dict[str, dict]
    anomalous_hashtags: list[str]
    burst_day: str

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def load(cls, path) -> "GroundTruth":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n",
                              encoding="utf-8")


@dataclass
class Scenario:
    tweets: list[Tweet]
    agents: dict[str, Agent]
    truth: GroundTruth

    def corpus(self):
        return build_corpus(self.tweets, self.agents)

    def write(self, corpus_path, truth_path) -> None:
        with open(corpus_path, "w", encoding="utf-8") as fh:
            for tweet in self.tweets:
                fh.write(serialize_tweet(tweet, self.agents[tweet.author_id]) + "\n")
        self.truth.dump(truth_path)


class _Gen:
    def __init__(self, config: CampaignConfig):
        self.c = config
        self.rng = np.random.default_rng(config.seed)
        self.start = datetime.strptime(config.start_date, "%Y-%m-%d").replace(tzinfo=timezone.utc)
        self.raw: list[tuple] = []

    def pick(self, seq):
        return seq[int(self.rng.integers(len(seq)))]

    def when(self, day: int) -> datetime:
        return self.start + timedelta(days=day, seconds=int(self.rng.integers(86400)))

    def zipf_words(self, vocab: list[str], n: int) -> list[str]:
        w = 1.0 / np.arange(1, len(vocab) + 1)
        idx = self.rng.choice(len(vocab), size=n, p=w / w.sum())
        return [vocab[i] for i in idx]

    def add(self, author, day, text, hashtags=(), mentions=(), rt=None, label=None):
        self.raw.append((self.when(day), author, text, tuple(hashtags), tuple(mentions), rt, label))


def _anomalous_tags(rng: np.random.Generator, n: int, exclude: set[str]) -> list[str]:
    alphabet = string.ascii_lowercase + string.digits
    tags: list[str] = []
    seen = set(exclude)
    while len(tags) < n:
        tag = "".join(alphabet[i] for i in rng.integers(len(alphabet), size=4))
        if is_anomalous_hashtag(tag) and tag not in seen:
            seen.add(tag)
            tags.append(tag)
    return tags


def _pseudonym(agent_id: str) -> str:
    return hashlib.sha256(agent_id.encode()).hexdigest()[:12]


def _bot_probs(rng, ids: list[str], fraction: float) -> dict[str, float]:
    n_bots = int(round(fraction * len(ids)))
    order = rng.permutation(len(ids))
    bots = {ids[i] for i in order[:n_bots]}
    return {a: round(float(rng.uniform(0.5, 1.0)) if a in bots else float(rng.uniform(0.0, 0.49)), 4)
            for a in ids}


def generate(config: CampaignConfig) -> Scenario:
    """Build a labeled scenario. Raises :class:`ConfigError` on an invalid config."""
    errors = validate_config(config)
    if errors:
        raise ConfigError(errors)
    g = _Gen(config)
    rng = g.rng
    c = config
    px = c.id_prefix
    n_topics = len(c.organic_topic_vocabularies)
    organic = [f"{px}o{i:04d}" for i in range(c.n_organic_agents)]
    influencers = [f"{px}i{i:03d}" for i in range(c.n_influencers)]
    coordinated = [f"{px}c{c.coordinated_id_start + i:04d}" for i in range(c.n_coordinated_agents)]
    topic = {a: i % n_topics for i, a in enumerate(organic)}
    topic.update({a: i % n_topics for i, a in enumerate(influencers)})
    by_topic = [[a for a in organic if topic[a] == t] for t in range(n_topics)]

    # Metadata. Organic followers are capped so influencers always dominate.
    organic_followers = np.minimum(np.exp(rng.normal(5.0, 1.0, len(organic))), math.exp(5.0) * 20)
    median = float(np.median(organic_followers))
    bot_p = _bot_probs(rng, organic, c.bot_fraction_organic)
    bot_p.update(_bot_probs(rng, coordinated, c.bot_fraction_coordinated))
    agents: dict[str, Agent] = {}
    for a, f in zip(organic, organic_followers):
        agents[a] = Agent(a, _pseudonym(a), int(f),
                          int(np.exp(rng.normal(5.5, 0.8))), bool(rng.random() < 0.02), bot_p[a])
    for a in influencers:
        agents[a] = Agent(a, _pseudonym(a), int(median * c.influencer_follower_multiplier * rng.uniform(1, 3)),
                          int(np.exp(rng.normal(6.0, 0.5))), True, round(float(rng.uniform(0.01, 0.1)), 4))
    for a in coordinated:
        agents[a] = Agent(a, _pseudonym(a), int(np.exp(rng.normal(4.0, 0.8))),
                          int(np.exp(rng.normal(6.5, 0.5))), False, bot_p[a])

    cue_words = [w for words in ORGANIC_CUES.values() for w in words]
    mention_w = np.array(c.organic_mention_weights, dtype=float)
    mention_w /= mention_w.sum()

    # Organic chatter.
    for a in organic:
        t = topic[a]
        for day in range(c.n_days):
            cross = c.pre_cross_group_prob if day < c.polarization_day else c.post_cross_group_prob
            for _ in range(int(rng.poisson(c.organic_tweets_per_day))):
                words = g.zipf_words(c.organic_topic_vocabularies[t],
                                     int(rng.integers(c.organic_words_min, c.organic_words_max + 1)))
                if rng.random() < c.organic_cue_prob * len(ORGANIC_CUES):
                    words.insert(int(rng.integers(len(words) + 1)), g.pick(cue_words))
                text = " ".join(words)
                if rng.random() < 0.08:
                    text += "!"
                elif rng.random() < 0.08:
                    text += "?"
                mentions = []
                for _ in range(int(rng.choice(len(mention_w), p=mention_w))):
                    if rng.random() < c.organic_influencer_mention_prob:
                        mentions.append(g.pick(influencers))
                        continue
                    if rng.random() < cross:
                        other = [x for x in range(n_topics) if x != t]
                        pool = by_topic[g.pick(other)]
                    else:
                        pool = by_topic[t]
                    target = g.pick(pool)
                    if target != a:
                        mentions.append(target)
                mentions = list(dict.fromkeys(mentions))
                tags = []
                if rng.random() < c.organic_hashtag_prob:
                    tags.append(g.pick(c.organic_hashtag_pools[t]))
                rt = None
                if rng.random() < c.organic_retweet_prob:
                    pool = by_topic[t] if rng.random() >= cross else by_topic[(t + 1) % n_topics]
                    rt = g.pick(pool)
                    if rt == a:
                        rt = None
                body = " ".join([*(f"@{m}" for m in mentions), text, *(f"#{h}" for h in tags)])
                if rt:
                    body = f"RT @{rt}: {body}"
                g.add(a, day, body, tags, mentions, rt, {"label": "organic", "template": None, "topic": t})

    # Influencers back one another with encouragement.
    for i, a in enumerate(influencers):
        t = topic[a]
        others = [x for x in influencers if x != a]
        for day in range(c.n_days):
            for _ in range(int(rng.poisson(c.influencer_tweets_per_day))):
                words = g.zipf_words(c.organic_topic_vocabularies[t], 6)
                mentions = [g.pick(others)] if others else []
                tag = g.pick(c.organic_hashtag_pools[t])
                body = " ".join([g.pick(INFLUENCER_PHRASES), *(f"@{m}" for m in mentions), *words, f"#{tag}"])
                g.add(a, day, body, [tag], mentions, None, {"label": "influencer", "template": None, "topic": t})

    # The campaign.
    pool_tags = {tag for pool in c.organic_hashtag_pools for tag in pool}
    hijack_tags = _anomalous_tags(rng, c.n_anomalous_hashtags, pool_tags)
    counts = rng.integers(c.coordinated_tweets_min, c.coordinated_tweets_max + 1, size=len(coordinated))
    slots = [a for a, k in zip(coordinated, counts) for _ in range(int(k))]
    total = len(slots)
    n_burst = math.ceil(c.burst_fraction * total - 1e-9)
    other_days = [d for d in range(c.n_days) if d != c.burst_day]
    order = rng.permutation(total)
    days = np.empty(total, dtype=int)
    days[order[:n_burst]] = c.burst_day
    rest = order[n_burst:]
    if len(rest):
        days[rest] = [other_days[i] for i in rng.integers(len(other_days), size=len(rest))] \
            if other_days else c.burst_day
    for a, day in zip(slots, days):
        mentions = list(rng.choice(influencers, size=min(len(influencers), int(rng.integers(1, 3))),
                                   replace=False))
        peers = [x for x in coordinated if x != a]
        if peers and rng.random() < c.coordinated_peer_mention_prob:
            mentions += list(rng.choice(peers, size=min(len(peers), int(rng.integers(1, 3))), replace=False))
        if rng.random() < c.coordinated_organic_mention_prob:
            mentions.append(g.pick(organic))
        mentions = [str(m) for m in dict.fromkeys(mentions)]
        k = int(rng.integers(len(c.coordinated_templates)))
        text = c.coordinated_templates[k].format(
            time=g.pick(TEMPLATE_TIMES), greeting=g.pick(TEMPLATE_GREETINGS),
            city=g.pick(TEMPLATE_CITIES), mentions=" ".join(f"@{m}" for m in mentions),
        )
        tags = [g.pick(hijack_tags), g.pick(g.pick(c.organic_hashtag_pools))]
        text += " " + " ".join(f"#{h}" for h in tags)
        g.add(a, int(day), text, tags, mentions, None, {"label": "campaign", "template": k, "topic": None})

    g.raw.sort(key=lambda r: (r[0], r[1], r[2]))
    width = max(6, len(str(len(g.raw))))
    tweets, labels = [], {}
    for n, (ts, author, text, tags, mentions, rt, label) in enumerate(g.raw, start=1):
        tid = f"{px}t{n:0{width}d}"
        tweets.append(Tweet(tid, author, ts, text, tags, mentions, rt, ()))
        labels[tid] = label

    truth = GroundTruth(
        coordinated=coordinated,
        influencers=influencers,
        organic=organic,
        bots={a: agents[a].bot_probability >= 0.5 for a in sorted(agents)},
        agent_topic={a: topic[a] for a in sorted(topic)},
        tweet_labels=labels,
        anomalous_hashtags=sorted(hijack_tags),
        burst_day=(g.start + timedelta(days=c.burst_day)).date().isoformat(),
    )
    scenario = Scenario(tweets, agents, truth)
    problems = self_check(scenario, c)
    if problems:
        raise AssertionError("generated scenario failed its self-check: " + "; ".join(problems))
    return scenario


def self_check(scenario: Scenario, config: CampaignConfig) -> list[str]:
    """Verify the planted signatures on a generated scenario."""
    problems = []
    labels = scenario.truth.tweet_labels
    campaign = [t for t in scenario.tweets if labels[t.id]["label"] == "campaign"]
    for t in scenario.tweets:
        anomalous = any(is_anomalous_hashtag(h) for h in t.hashtags)
        if labels[t.id]["label"] == "campaign" and not anomalous:
            problems.append(f"campaign tweet {t.id} lacks a hijack tag")
        if labels[t.id]["label"] != "campaign" and anomalous:
            problems.append(f"non-campaign tweet {t.id} carries a hijack tag")
    if campaign:
        burst = sum(format_timestamp(t.created_at)[:10] == scenario.truth.burst_day for t in campaign)
        if burst / len(campaign) < config.burst_fraction - 1e-12:
            problems.append("burst fraction below target")
    coord = scenario.truth.coordinated
    n_bots = sum(scenario.truth.bots[a] for a in coord)
    if n_bots != int(round(config.bot_fraction_coordinated * len(coord))):
        problems.append("coordinated bot count off target")
    organic = scenario.truth.organic
    if sum(scenario.truth.bots[a] for a in organic) != int(round(config.bot_fraction_organic * len(organic))):
        problems.append("organic bot count off target")
    inf = [scenario.agents[a].followers_count for a in scenario.truth.influencers]
    rest = [ag.followers_count for a, ag in scenario.agents.items() if a not in scenario.truth.influencers]
    if inf and rest and min(inf) <= max(rest):
        problems.append("influencer follower counts do not dominate")
    return problems


def generate_to_files(config: CampaignConfig, corpus_path, truth_path) -> Scenario:
    scenario = generate(config)
    scenario.write(corpus_path, truth_path)
    return scenario
