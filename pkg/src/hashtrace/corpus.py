"""Tweet corpus ingestion.

Input files are JSON Lines: one tweet object per line. Required keys are
``id``, ``author_id``, ``created_at`` (ISO-8601) and ``text``. Optional keys
are ``hashtags``, ``mentions``, ``retweet_of_author``, ``urls`` and the
author metadata ``screen_name_hash``, ``followers_count``,
``following_count``, ``verified`` and ``bot_probability``. Unknown keys are
ignored.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path
from typing import Iterable, Optional

HASHTAG_RE = re.compile(r"#(\w+)")
MENTION_RE = re.compile(r"@(\w+)")
URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_TAG_CHARS = re.compile(r"[^a-z0-9_]")

METADATA_KEYS = (
    "screen_name_hash",
    "followers_count",
    "following_count",
    "verified",
    "bot_probability",
)


class ParseError(ValueError):
    """A record could not be decoded. ``lineno`` is 1-based (0 if unknown)."""

    def __init__(self, message: str, lineno: int = 0):
        self.lineno = lineno
        prefix = f"line {lineno}: " if lineno else ""
        super().__init__(prefix + message)


class SchemaError(ParseError):
    """A decoded record is missing a required field or has a bad value."""


def normalize_hashtag(tag: str) -> str:
    """Lowercase, drop leading '#', keep only ASCII alphanumerics and '_'."""
    return _TAG_CHARS.sub("", tag.lstrip("#").lower())


def parse_timestamp(value: str) -> datetime:
    """Parse ISO-8601 into an aware UTC datetime at second precision.

    Naive timestamps are taken to be UTC.
    """
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Tweet:
    id: str
    author_id: str
    created_at: datetime
    text: str
    hashtags: tuple[str, ...] = ()
    mentions: tuple[str, ...] = ()
    retweet_of_author: Optional[str] = None
    urls: tuple[str, ...] = ()

    @property
    def referenced(self) -> tuple[str, ...]:
        """Distinct agents mentioned or retweeted, author excluded, in order."""
        seen: dict[str, None] = {}
        for agent in (*self.mentions, self.retweet_of_author):
            if agent and agent != self.author_id:
                seen.setdefault(agent, None)
        return tuple(seen)


@dataclass(frozen=True)
class Agent:
    id: str
    screen_name_hash: str = ""
    followers_count: Optional[int] = None
    following_count: Optional[int] = None
    verified: Optional[bool] = None
    bot_probability: Optional[float] = None

    @property
    def has_metadata(self) -> bool:
        return self.followers_count is not None


@dataclass(frozen=True)
class Corpus:
    tweets: tuple[Tweet, ...]
    agents: dict[str, Agent]
    time_span: Optional[tuple[datetime, datetime]]

    @property
    def is_empty(self) -> bool:
        return not self.tweets

    def tweets_by(self, agents: Iterable[str]) -> list[Tweet]:
        wanted = set(agents)
        return [t for t in self.tweets if t.author_id in wanted]

    def authors(self) -> set[str]:
        return {t.author_id for t in self.tweets}

    def start_day(self) -> date:
        if self.time_span is None:
            raise ValueError("empty corpus has no time span")
        return self.time_span[0].date()

    def days(self) -> list[date]:
        """Every UTC calendar day from the first to the last tweet."""
        if self.time_span is None:
            return []
        first, last = self.time_span[0].date(), self.time_span[1].date()
        return [first + timedelta(days=i) for i in range((last - first).days + 1)]


@dataclass(frozen=True)
class CorpusStats:
    num_agents: int
    num_tweets: int
    bot_percentage: float


def _str_list(value, key: str, lineno: int) -> list[str]:
    if value is None:
        return []
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaError(f"field {key!r} must be a list of strings", lineno)
    return value


def _optional_int(value, key: str, lineno: int) -> Optional[int]:
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
        raise SchemaError(f"field {key!r} must be a non-negative integer", lineno)
    if isinstance(value, float) and not value.is_integer():
        raise SchemaError(f"field {key!r} must be a non-negative integer", lineno)
    return int(value)


def _decode(line: str, lineno: int) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed record: {exc.msg}", lineno) from exc
    if not isinstance(record, dict):
        raise ParseError("record is not an object", lineno)
    return record


def _tweet_from_record(record: dict, lineno: int) -> Tweet:
    for key in ("id", "author_id", "created_at"):
        value = record.get(key)
        if not isinstance(value, str) or not value.strip():
            raise SchemaError(f"missing required field {key!r}", lineno)
    text = record.get("text") or ""
    if not isinstance(text, str):
        raise SchemaError("field 'text' must be a string", lineno)
    try:
        created = parse_timestamp(record["created_at"])
    except ValueError as exc:
        raise SchemaError(f"bad created_at {record['created_at']!r}", lineno) from exc

    if "hashtags" in record and record["hashtags"] is not None:
        raw_tags = _str_list(record["hashtags"], "hashtags", lineno)
    else:
        raw_tags = HASHTAG_RE.findall(text)
    if "mentions" in record and record["mentions"] is not None:
        mentions = _str_list(record["mentions"], "mentions", lineno)
    else:
        mentions = MENTION_RE.findall(text)
    mentions = [m.lstrip("@") for m in mentions if m.lstrip("@")]

    tags = [t for t in (normalize_hashtag(tag) for tag in raw_tags) if t]
    rt = record.get("retweet_of_author")
    if rt is not None and (not isinstance(rt, str) or not rt):
        raise SchemaError("field 'retweet_of_author' must be a non-empty string", lineno)
    return Tweet(
        id=record["id"],
        author_id=record["author_id"],
        created_at=created,
        text=text,
        hashtags=tuple(tags),
        mentions=tuple(mentions),
        retweet_of_author=rt,
        urls=tuple(_str_list(record.get("urls"), "urls", lineno)),
    )


def _agent_from_record(record: dict, lineno: int) -> Agent:
    bot = record.get("bot_probability")
    if bot is not None:
        if isinstance(bot, bool) or not isinstance(bot, (int, float)) or not 0 <= bot <= 1:
            raise SchemaError("bot_probability must be a number in [0, 1]", lineno)
        bot = float(bot)
    verified = record.get("verified")
    if verified is not None and not isinstance(verified, bool):
        raise SchemaError("field 'verified' must be a boolean", lineno)
    return Agent(
        id=record["author_id"],
        screen_name_hash=str(record.get("screen_name_hash") or ""),
        followers_count=_optional_int(record.get("followers_count"), "followers_count", lineno),
        following_count=_optional_int(record.get("following_count"), "following_count", lineno),
        verified=verified,
        bot_probability=bot,
    )


def parse_tweet_record(line: str, lineno: int = 0) -> Tweet:
    """Parse one JSON record into a :class:`Tweet`.

    When ``hashtags`` or ``mentions`` are absent they are pulled from the
    text. Raises :class:`ParseError` for undecodable input and
    :class:`SchemaError` for missing or ill-typed fields.
    """
    return _tweet_from_record(_decode(line, lineno), lineno)


def serialize_tweet(tweet: Tweet, agent: Optional[Agent] = None) -> str:
    record: dict = {
        "id": tweet.id,
        "author_id": tweet.author_id,
        "created_at": format_timestamp(tweet.created_at),
        "text": tweet.text,
        "hashtags": list(tweet.hashtags),
        "mentions": list(tweet.mentions),
        "urls": list(tweet.urls),
    }
    if tweet.retweet_of_author is not None:
        record["retweet_of_author"] = tweet.retweet_of_author
    if agent is not None:
        for key in METADATA_KEYS:
            value = getattr(agent, key)
            if value is not None and value != "":
                record[key] = value
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def heuristic_bot_probability(followers_count: int) -> float:
    """Follower-count stand-in used only when no external score exists.

    This is a crude placeholder, not a bot classifier.
    """
    return 0.5 - min(0.5, math.log10(1 + followers_count) / 10)


def _merge_agent(old: Optional[Agent], new: Agent) -> Agent:
    if old is None:
        return new
    # First non-absent value per field wins.
    values = {
        key: getattr(old, key) if getattr(old, key) not in (None, "") else getattr(new, key)
        for key in METADATA_KEYS
    }
    return Agent(id=old.id, **values)


def build_corpus(tweets: Iterable[Tweet], agents: Optional[dict[str, Agent]] = None) -> Corpus:
    """Assemble a corpus, materializing metadata-less agents for unseen ids."""
    tweets = tuple(tweets)
    known = dict(agents or {})
    seen_ids: set[str] = set()
    resolved: dict[str, Agent] = {}
    for tweet in tweets:
        if tweet.id in seen_ids:
            raise SchemaError(f"duplicate tweet id {tweet.id!r}")
        seen_ids.add(tweet.id)
        for agent_id in (tweet.author_id, *tweet.mentions, tweet.retweet_of_author):
            if agent_id and agent_id not in resolved:
                resolved[agent_id] = known.get(agent_id) or Agent(id=agent_id)
    span = None
    if tweets:
        stamps = [t.created_at for t in tweets]
        span = (min(stamps), max(stamps))
    return Corpus(tweets=tweets, agents=resolved, time_span=span)


def load_corpus(
    path,
    bot_threshold: float = 0.5,
    heuristic_bots: bool = False,
) -> Corpus:
    """Read a JSON Lines corpus.

    ``bot_threshold`` is validated here so that a bad value fails at load
    time; statistics take it again explicitly. With ``heuristic_bots`` on,
    agents that have a follower count but no bot probability receive
    :func:`heuristic_bot_probability`.
    """
    if not 0 <= bot_threshold <= 1:
        raise ValueError(f"bot_threshold must be in [0, 1], got {bot_threshold}")
    tweets: list[Tweet] = []
    agents: dict[str, Agent] = {}
    ids: set[str] = set()
    with open(Path(path), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = _decode(line, lineno)
            tweet = _tweet_from_record(record, lineno)
            if tweet.id in ids:
                raise SchemaError(f"duplicate tweet id {tweet.id!r}", lineno)
            ids.add(tweet.id)
            tweets.append(tweet)
            agents[tweet.author_id] = _merge_agent(
                agents.get(tweet.author_id), _agent_from_record(record, lineno)
            )
    if heuristic_bots:
        for agent_id, agent in agents.items():
            if agent.bot_probability is None and agent.followers_count is not None:
                agents[agent_id] = Agent(
                    id=agent.id,
                    screen_name_hash=agent.screen_name_hash,
                    followers_count=agent.followers_count,
                    following_count=agent.following_count,
                    verified=agent.verified,
                    bot_probability=heuristic_bot_probability(agent.followers_count),
                )
    return build_corpus(tweets, agents)


def write_corpus(corpus: Corpus, path) -> None:
    """Write tweets back out, attaching author metadata to each record."""
    with open(Path(path), "w", encoding="utf-8") as fh:
        for tweet in corpus.tweets:
            fh.write(serialize_tweet(tweet, corpus.agents.get(tweet.author_id)) + "\n")


def corpus_stats(
    corpus: Corpus,
    subset: Optional[Iterable[str]] = None,
    bot_threshold: float = 0.5,
) -> CorpusStats:
    if subset is None:
        agent_ids = set(corpus.agents)
        num_tweets = len(corpus.tweets)
    else:
        agent_ids = set(subset)
        unknown = agent_ids - corpus.agents.keys()
        if unknown:
            raise ValueError(f"unknown agent ids in subset: {sorted(unknown)[:5]}")
        num_tweets = sum(1 for t in corpus.tweets if t.author_id in agent_ids)
    scored = [
        corpus.agents[a].bot_probability
        for a in agent_ids
        if corpus.agents[a].bot_probability is not None
    ]
    bots = sum(1 for p in scored if p >= bot_threshold)
    pct = 100.0 * bots / len(scored) if scored else 0.0
    return CorpusStats(num_agents=len(agent_ids), num_tweets=num_tweets, bot_percentage=pct)


STATS_HEADER = ("Dataset", "Num Agents", "Num Tweets", "Bot Percentage (%)")


def format_stats_rows(rows: Iterable[tuple[str, CorpusStats]]) -> list[list[str]]:
    """Lay out statistics as dataset-summary rows, header first."""
    out = [list(STATS_HEADER)]
    for label, stats in rows:
        out.append(
            [label, str(stats.num_agents), str(stats.num_tweets), f"{stats.bot_percentage:.2f}"]
        )
    return out


def window(corpus: Corpus, start: datetime, end: datetime) -> Corpus:
    """Tweets with ``start <= created_at < end``; agents cut to those present."""
    if start > end:
        raise ValueError("window start is after its end")
    kept = [t for t in corpus.tweets if start <= t.created_at < end]
    return build_corpus(kept, corpus.agents)


def day_start(day: date) -> datetime:
    return datetime.combine(day, time(0), tzinfo=timezone.utc)


def day_window(corpus: Corpus, first_day: int, n_days: int) -> Corpus:
    """Window of ``n_days`` whole UTC days starting ``first_day`` days after the corpus start."""
    if corpus.is_empty:
        return corpus
    origin = day_start(corpus.start_day()) + timedelta(days=first_day)
    return window(corpus, origin, origin + timedelta(days=n_days))


def num_days(corpus: Corpus) -> int:
    return len(corpus.days())


def without_authors(corpus: Corpus, authors: Iterable[str]) -> Corpus:
    drop = set(authors)
    return build_corpus([t for t in corpus.tweets if t.author_id not in drop], corpus.agents)
