from __future__ import annotations

import functools
from datetime import datetime, timedelta, timezone

import pytest

from hashtrace.corpus import Agent, Tweet, build_corpus
from hashtrace.synthgen import CampaignConfig, generate

T0 = datetime(2021, 5, 14, tzinfo=timezone.utc)


def tw(tid, author, day=0, text="", hashtags=(), mentions=(), rt=None, hour=12):
    return Tweet(
        id=tid,
        author_id=author,
        created_at=T0 + timedelta(days=day, hours=hour),
        text=text,
        hashtags=tuple(hashtags),
        mentions=tuple(mentions),
        retweet_of_author=rt,
    )


def agent(aid, followers=None, bot=None, following=None, verified=None):
    return Agent(id=aid, followers_count=followers, following_count=following,
                 verified=verified, bot_probability=bot)


def corpus_of(tweets, agents=()):
    return build_corpus(tweets, {a.id: a for a in agents})


@functools.lru_cache(maxsize=None)
def scenario(seed: int = 7, **overrides):
    cfg = CampaignConfig(seed=seed, **overrides)
    return generate(cfg)


@pytest.fixture(scope="session")
def default_scenario():
    return scenario(7)


@pytest.fixture(scope="session")
def default_corpus(default_scenario):
    return default_scenario.corpus()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
