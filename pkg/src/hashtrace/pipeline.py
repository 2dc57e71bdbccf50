"""Six-stage run: DISCOVERY, WHO, DID WHAT, TO WHOM, WHY, IMPACT."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import platform
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import __version__
from .bend import (
    GroupComparison,
    ManeuverContext,
    build_context,
    compare_groups,
    default_lexicon,
    load_lexicon,
    validate_weights,
)
from .corpus import Corpus, corpus_stats, day_window, format_stats_rows, load_corpus, parse_timestamp
from .discovery import (
    BurstProfile,
    DiscoveryResult,
    burst_concentration,
    extract_coordinated_agents,
    write_burst_csv,
    write_discovery_report,
)
from .graph import build_communication_network, export_graph
from .impact import EIReport, polarization_report
from .narrative import default_stopwords, fit_lda, load_stopwords, preprocess, topic_report, write_topic_report
from .targeting import CorrelationTable, correlation_table, extract_targets

log = logging.getLogger(__name__)

STAGES = ("DISCOVERY", "WHO", "DID WHAT", "TO WHOM", "WHY", "IMPACT")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: str):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


@dataclass
class PipelineConfig:
    input: str = ""
    output_dir: str = "run"
    discovery_days: int = 3
    bot_threshold: float = 0.5
    heuristic_bots: bool = False
    anomaly_min_fraction: float = 0.5
    anomaly_min_size: int = 3
    louvain_resolution: float = 1.0
    louvain_seed: int = 0
    lexicon: Optional[str] = None
    stopwords: Optional[str] = None
    leader_percentile: float = 0.90
    maneuver_weights: dict = field(default_factory=dict)
    ratio_threshold: float = 0.5
    correlation_mode: str = "ratio"
    lda_k: int = 5
    lda_alpha: Optional[float] = None
    lda_beta: float = 0.01
    lda_iters: int = 1000
    lda_seed: int = 0
    lda_top_words: int = 20
    impact_days: int = 3
    impact_pre_window: Optional[list] = None
    impact_post_window: Optional[list] = None
    impact_weighted: bool = False
    impact_min_size: int = 1
    graph_format: str = "graphml"

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown pipeline config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        return cls.from_dict(yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {})

    def to_dict(self) -> dict:
        return asdict(self)

    def problems(self, check_files: bool = True) -> list[str]:
        out = []
        for name in ("bot_threshold", "anomaly_min_fraction", "leader_percentile", "ratio_threshold"):
            if not 0 <= getattr(self, name) <= 1:
                out.append(f"{name} must be in [0, 1]")
        for name in ("discovery_days", "impact_days", "lda_k", "lda_iters", "lda_top_words",
                     "anomaly_min_size"):
            if getattr(self, name) < 1:
                out.append(f"{name} must be at least 1")
        if self.louvain_resolution <= 0:
            out.append("louvain_resolution must be positive")
        if self.lda_beta <= 0 or (self.lda_alpha is not None and self.lda_alpha <= 0):
            out.append("LDA priors must be positive")
        if self.correlation_mode not in ("ratio", "mean"):
            out.append("correlation_mode must be 'ratio' or 'mean'")
        if self.graph_format not in ("graphml", "dot", "edgelist"):
            out.append("graph_format must be graphml, dot or edgelist")
        for name in ("impact_pre_window", "impact_post_window"):
            win = getattr(self, name)
            if win is not None:
                try:
                    start, end = (parse_timestamp(x) for x in win)
                    if start > end:
                        out.append(f"{name} starts after it ends")
                except (TypeError, ValueError):
                    out.append(f"{name} must be two ISO-8601 timestamps")
        try:
            validate_weights(self.maneuver_weights)
        except ValueError as exc:
            out.append(str(exc))
        if check_files:
            if not self.input or not Path(self.input).is_file():
                out.append(f"input file not found: {self.input!r}")
            for name in ("lexicon", "stopwords"):
                path = getattr(self, name)
                if path and not Path(path).is_file():
                    out.append(f"{name} file not found: {path!r}")
        return out


@dataclass
class ReportBundle:
    output_dir: Path
    artifacts: dict[str, Path]
    discovery: Optional[DiscoveryResult] = None
    stats: Optional[list] = None
    burst: Optional[dict[str, BurstProfile]] = None
    maneuvers: Optional[GroupComparison] = None
    correlations: Optional[CorrelationTable] = None
    topics: Optional[dict] = None
    impact: Optional[EIReport] = None


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_rows(path: Path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def _window(pair):
    return None if pair is None else tuple(parse_timestamp(x) for x in pair)


class Pipeline:
    """Stage runner sharing the corpus and intermediate results between stages."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.output_dir)
        self.artifacts: dict[str, Path] = {}
        self.corpus: Optional[Corpus] = None
        self.discovery: Optional[DiscoveryResult] = None
        self.ctx: Optional[ManeuverContext] = None
        self.bundle = ReportBundle(self.out, self.artifacts)

    def _path(self, key: str, name: str) -> Path:
        path = self.out / name
        self.artifacts[key] = path
        return path

    def load(self) -> Corpus:
        if self.corpus is None:
            cfg = self.config
            self.corpus = load_corpus(cfg.input, cfg.bot_threshold, cfg.heuristic_bots)
        return self.corpus

    def discover(self) -> DiscoveryResult:
        cfg = self.config
        corpus = self.load()
        if corpus.is_empty:
            raise ValueError(f"input {cfg.input!r} holds zero tweets; nothing to discover")
        result = extract_coordinated_agents(
            corpus, cfg.discovery_days, cfg.anomaly_min_fraction, cfg.anomaly_min_size,
            cfg.louvain_resolution, cfg.louvain_seed,
        )
        write_discovery_report(result, self._path("discovery", "discovery.json"))
        export_graph(result.hashtag_graph, cfg.graph_format,
                     self._path("hashtag_graph", f"hashtags.{cfg.graph_format}"))
        self.discovery = self.bundle.discovery = result
        return result

    def who(self) -> None:
        cfg = self.config
        corpus, coordinated = self.load(), self._coordinated()
        rows = [("Full", corpus_stats(corpus, None, cfg.bot_threshold))]
        if coordinated:
            rows.append(("Coordinated agents", corpus_stats(corpus, coordinated, cfg.bot_threshold)))
        table = format_stats_rows(rows)
        _write_rows(self._path("stats", "stats.csv"), table)
        self.bundle.stats = table
        profiles = {}
        if coordinated:
            profiles["coordinated"] = burst_concentration(corpus, coordinated)
        others = corpus.authors() - coordinated
        if others:
            profiles["other"] = burst_concentration(corpus, others)
        write_burst_csv(profiles, self._path("burst", "burst.csv"))
        self.bundle.burst = profiles

    def context(self) -> ManeuverContext:
        if self.ctx is None:
            cfg = self.config
            corpus = self.load()
            lexicon = load_lexicon(cfg.lexicon) if cfg.lexicon else default_lexicon()
            self.ctx = build_context(
                corpus, lexicon, cfg.leader_percentile,
                community_corpus=day_window(corpus, 0, cfg.discovery_days),
                resolution=cfg.louvain_resolution, seed=cfg.louvain_seed,
                weights=cfg.maneuver_weights,
            )
        return self.ctx

    def did_what(self) -> GroupComparison:
        corpus, coordinated = self.load(), self._coordinated(required=True)
        others = corpus.authors() - coordinated
        if not others:
            raise ValueError("no non-coordinated authors to compare against")
        comparison = compare_groups(coordinated, others, corpus, self.context(),
                                    labels=("coordinated", "other"))
        comparison.write_csv(self._path("maneuvers", "maneuvers.csv"))
        self.bundle.maneuvers = comparison
        return comparison

    def to_whom(self) -> CorrelationTable:
        cfg = self.config
        corpus, coordinated = self.load(), self._coordinated(required=True)
        targets = extract_targets(corpus, coordinated)
        network = build_communication_network(corpus)
        table = correlation_table(targets, corpus, self.context(), network,
                                  cfg.correlation_mode, cfg.ratio_threshold)
        table.write(self._path("correlations", "correlations.csv"),
                    self._path("correlations_long", "correlations_long.csv"))
        _write_rows(self._path("targets", "targets.csv"),
                    [["agent", "status"]] + [[p.agent, "used"] for p in table.profiles]
                    + [[a, "dropped: no tweets"] for a in table.dropped])
        net = network.with_attrs("discovered", {n: n in coordinated for n in network.nodes})
        export_graph(net, cfg.graph_format, self._path("communication_graph", f"communication.{cfg.graph_format}"))
        self.bundle.correlations = table
        return table

    def why(self) -> dict:
        cfg = self.config
        corpus, coordinated = self.load(), self._coordinated(required=True)
        stopwords = load_stopwords(cfg.stopwords) if cfg.stopwords else default_stopwords()
        ds = preprocess(corpus.tweets_by(coordinated), stopwords)
        model = fit_lda(ds, cfg.lda_k, cfg.lda_alpha, cfg.lda_beta, cfg.lda_iters, cfg.lda_seed)
        report = topic_report(model, ds, cfg.lda_top_words)
        write_topic_report(report, self._path("topics", "topics.json"))
        self.bundle.topics = report
        self._lda = (model, ds)
        return report

    def impact(self) -> EIReport:
        cfg = self.config
        corpus, coordinated = self.load(), self._coordinated()
        report = polarization_report(
            corpus, coordinated, _window(cfg.impact_pre_window), _window(cfg.impact_post_window),
            seed=cfg.louvain_seed, resolution=cfg.louvain_resolution,
            weighted=cfg.impact_weighted, days=cfg.impact_days,
        )
        themes = self._subgroup_themes([r.members for r in report.rows])
        report.rows = [replace(r, theme=themes.get(r.subgroup)) for r in report.rows]
        report.write_csv(self._path("impact", "impact.csv"), cfg.impact_min_size)
        self.bundle.impact = report
        return report

    def _subgroup_themes(self, subgroups: list[set[str]]) -> dict[int, int]:
        lda = getattr(self, "_lda", None)
        if lda is None:
            return {}
        model, ds = lda
        author = {t.id: t.author_id for t in self.load().tweets}
        theta = model.theta()
        themes = {}
        for cid, members in enumerate(subgroups):
            rows = [i for i, tid in enumerate(ds.tweet_ids) if author[tid] in members]
            if rows:
                themes[cid] = int(np.argmax(theta[rows].sum(axis=0)))
        return themes

    def _coordinated(self, required: bool = False) -> set[str]:
        if self.discovery is None:
            raise ValueError("discovery has not run")
        agents = set(self.discovery.coordinated_agents)
        if required and not agents:
            raise ValueError("no coordinated agents were discovered")
        return agents

    def manifest(self) -> Path:
        cfg = self.config
        record = {
            "package": "hashtrace",
            "version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            # The run directory is left out so bundles written to different places compare equal.
            "config": {k: v for k, v in cfg.to_dict().items() if k != "output_dir"},
            "input_sha256": _sha256(Path(cfg.input)),
            "seeds": {"louvain": cfg.louvain_seed, "lda": cfg.lda_seed},
            "conventions": {
                "bot_rule": f"bot_probability >= {cfg.bot_threshold}",
                "centrality": "betweenness unnormalized on hop distance; eigenvector weighted, "
                              "largest component, unit norm; total degree weighted",
                "coherence": "umass",
                "ei_links": "weighted" if cfg.impact_weighted else "unweighted link counts",
                "pre_window": cfg.impact_pre_window or
                              f"first {cfg.impact_days} days minus discovered agents' tweets",
                "post_window": cfg.impact_post_window or f"last {cfg.impact_days} days",
                "maneuver_scores": "weighted mean of binary indicators",
                "correlation_mode": cfg.correlation_mode,
            },
            "artifacts": {k: {"file": p.name, "sha256": _sha256(p)}
                          for k, p in sorted(self.artifacts.items())},
        }
        path = self.out / "manifest.json"
        path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self.artifacts["manifest"] = path
        return path


def run_pipeline(config: PipelineConfig) -> ReportBundle:
    """Run every stage in order; files of completed stages stay on disk if a later stage fails."""
    problems = config.problems()
    if problems:
        raise StageError("CONFIG", "; ".join(problems))
    Path(config.output_dir).mkdir(parents=True, exist_ok=True)
    pipe = Pipeline(config)
    steps = [
        ("DISCOVERY", pipe.discover),
        ("WHO", pipe.who),
        ("DID WHAT", pipe.did_what),
        ("TO WHOM", pipe.to_whom),
        ("WHY", pipe.why),
        ("IMPACT", pipe.impact),
    ]
    for stage, step in steps:
        log.info("stage %s", stage)
        try:
            step()
        except StageError:
            raise
        except (ValueError, OSError) as exc:
            raise StageError(stage, str(exc)) from exc
    pipe.manifest()
    return pipe.bundle
