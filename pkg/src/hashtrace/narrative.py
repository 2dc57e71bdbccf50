"""Tweet-text preprocessing and LDA topic modeling by collapsed Gibbs sampling."""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .corpus import HASHTAG_RE, MENTION_RE, URL_RE, Tweet

_WORD_RE = re.compile(r"[^\W_]+")
RETWEET_MARKER = "rt"


def load_stopwords(path) -> set[str]:
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip().lower()
        if word and not word.startswith("#"):
            words.add(word)
    return words


def default_stopwords() -> set[str]:
    with resources.as_file(resources.files("hashtrace") / "data" / "stopwords_id.txt") as p:
        return load_stopwords(p)


def tokenize(text: str, stopwords: set[str]) -> list[str]:
    text = URL_RE.sub(" ", text)
    text = HASHTAG_RE.sub(" ", text)
    text = MENTION_RE.sub(" ", text)
    return [
        tok
        for tok in _WORD_RE.findall(text.lower())
        if len(tok) >= 2 and tok not in stopwords and tok != RETWEET_MARKER
    ]


@dataclass(frozen=True)
class DocumentSet:
    docs: list[list[str]]
    vocabulary: dict[str, int]
    tweet_ids: list[str]
    dropped: int = 0

    @property
    def words(self) -> list[str]:
        return sorted(self.vocabulary, key=self.vocabulary.__getitem__)

    def encoded(self) -> list[list[int]]:
        return [[self.vocabulary[w] for w in doc] for doc in self.docs]


def preprocess(tweets: Iterable[Tweet], stopwords: Optional[set[str]] = None) -> DocumentSet:
    """Strip URLs, hashtags, mentions, stopwords and the ``rt`` marker.

    Documents left empty are dropped and counted in ``dropped``.
    """
    stopwords = default_stopwords() if stopwords is None else stopwords
    docs, ids, dropped = [], [], 0
    for tweet in tweets:
        tokens = tokenize(tweet.text, stopwords)
        if tokens:
            docs.append(tokens)
            ids.append(tweet.id)
        else:
            dropped += 1
    vocab = {w: i for i, w in enumerate(sorted({w for d in docs for w in d}))}
    return DocumentSet(docs=docs, vocabulary=vocab, tweet_ids=ids, dropped=dropped)


@dataclass
class LdaModel:
    K: int
    topic_word_counts: np.ndarray
    doc_topic_counts: np.ndarray
    alpha: float
    beta: float
    seed: int
    iterations_run: int
    vocabulary: list[str]

    def theta(self) -> np.ndarray:
        """Per-document topic distributions (rows sum to 1)."""
        num = self.doc_topic_counts + self.alpha
        return num / num.sum(axis=1, keepdims=True)

    def phi(self) -> np.ndarray:
        """Per-topic word distributions (rows sum to 1)."""
        num = self.topic_word_counts + self.beta
        return num / num.sum(axis=1, keepdims=True)


def fit_lda(
    ds: DocumentSet,
    K: int = 5,
    alpha: Optional[float] = None,
    beta: float = 0.01,
    iters: int = 1000,
    seed: int = 0,
    callback: Optional[Callable[[int, list, list, list], None]] = None,
) -> LdaModel:
    """Collapsed Gibbs sampler; ``alpha`` defaults to ``50 / K``.

    ``callback(sweep, word_topic, doc_topic, topic_totals)`` runs after every
    sweep with the live count tables.
    """
    if K < 1:
        raise ValueError("K must be positive")
    if len(ds.docs) < K:
        raise ValueError(f"need at least K={K} documents, have {len(ds.docs)}")
    if not ds.vocabulary:
        raise ValueError("empty vocabulary")
    alpha = 50.0 / K if alpha is None else float(alpha)
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    docs = ds.encoded()
    V = len(ds.vocabulary)
    rng = random.Random(seed)
    nwt = [[0] * K for _ in range(V)]
    ndt = [[0] * K for _ in docs]
    nt = [0] * K
    z = []
    for d, doc in enumerate(docs):
        zd = []
        for w in doc:
            t = rng.randrange(K)
            zd.append(t)
            nwt[w][t] += 1
            ndt[d][t] += 1
            nt[t] += 1
        z.append(zd)

    vbeta = V * beta
    topics = range(K)
    cum = [0.0] * K
    for sweep in range(iters):
        for d, doc in enumerate(docs):
            zd, nd = z[d], ndt[d]
            for i, w in enumerate(doc):
                t = zd[i]
                nw = nwt[w]
                nw[t] -= 1
                nd[t] -= 1
                nt[t] -= 1
                total = 0.0
                for k in topics:
                    total += (nw[k] + beta) / (nt[k] + vbeta) * (nd[k] + alpha)
                    cum[k] = total
                u = rng.random() * total
                t = 0
                while t < K - 1 and cum[t] <= u:
                    t += 1
                zd[i] = t
                nw[t] += 1
                nd[t] += 1
                nt[t] += 1
        if callback is not None:
            callback(sweep, nwt, ndt, nt)

    return LdaModel(
        K=K,
        topic_word_counts=np.array(nwt, dtype=np.int64).T.copy(),
        doc_topic_counts=np.array(ndt, dtype=np.int64).reshape(len(docs), K),
        alpha=alpha,
        beta=beta,
        seed=seed,
        iterations_run=iters,
        vocabulary=ds.words,
    )


def top_words(model: LdaModel, n: int = 20) -> list[list[str]]:
    """Highest-count words per topic; equal counts fall back to alphabetical order."""
    out = []
    for row in model.topic_word_counts:
        order = sorted(range(len(row)), key=lambda j: (-row[j], model.vocabulary[j]))
        out.append([model.vocabulary[j] for j in order[:n]])
    return out


def coherence(model: LdaModel, ds: DocumentSet, top_n: int = 10) -> list[float]:
    """UMass coherence of each topic's ``top_n`` words over document co-occurrence."""
    if top_n > len(ds.vocabulary):
        raise ValueError(f"top_n={top_n} exceeds vocabulary size {len(ds.vocabulary)}")
    doc_sets = [set(d) for d in ds.docs]
    df: dict[str, set[int]] = {}
    for i, s in enumerate(doc_sets):
        for w in s:
            df.setdefault(w, set()).add(i)
    scores = []
    for words in top_words(model, top_n):
        total = 0.0
        for i in range(1, len(words)):
            for j in range(i):
                dj = df[words[j]]
                both = len(df[words[i]] & dj)
                total += math.log((both + 1) / len(dj))
        scores.append(total)
    return scores


def coherence_sweep(
    ds: DocumentSet,
    ks: Sequence[int] = tuple(range(2, 9)),
    top_n: int = 10,
    **fit_kw,
) -> dict[int, float]:
    """Mean UMass coherence for each candidate topic count."""
    return {k: float(np.mean(coherence(fit_lda(ds, K=k, **fit_kw), ds, top_n))) for k in ks}


def topic_report(model: LdaModel, ds: DocumentSet, n: int = 20, top_n: int = 10) -> dict:
    coh = coherence(model, ds, min(top_n, len(ds.vocabulary)))
    return {
        "coherence_metric": "umass",
        "K": model.K,
        "alpha": model.alpha,
        "beta": model.beta,
        "iterations": model.iterations_run,
        "seed": model.seed,
        "documents": len(ds.docs),
        "dropped_documents": ds.dropped,
        "topics": [
            {"topic": k, "coherence": coh[k], "top_words": words}
            for k, words in enumerate(top_words(model, n))
        ],
    }


def write_topic_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
