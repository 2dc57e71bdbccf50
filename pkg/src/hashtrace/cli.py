"""Command-line entry point: full pipeline runs and per-stage subcommands."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .corpus import corpus_stats, format_stats_rows, load_corpus
from .discovery import read_discovery_report
from .narrative import coherence_sweep, default_stopwords, load_stopwords, preprocess
from .pipeline import Pipeline, PipelineConfig, StageError, run_pipeline
from .synthgen import CampaignConfig, ConfigError, generate_to_files

log = logging.getLogger("hashtrace")


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    if getattr(args, "input", None):
        cfg.input = args.input
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    for key in ("discovery_days", "louvain_seed", "lda_k", "lda_iters", "lda_seed"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    return cfg


def _require(path, what: str) -> Path:
    path = Path(path) if path else None
    if path is None or not path.is_file():
        raise FileNotFoundError(f"required {what} not found: {path}")
    return path


def _stage_pipeline(args, stage: str) -> Pipeline:
    cfg = _config(args)
    problems = cfg.problems()
    if problems:
        raise StageError(stage, "; ".join(problems))
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    pipe = Pipeline(cfg)
    if stage != "DISCOVERY":
        default = Path(cfg.output_dir) / "discovery.json"
        report = _require(args.discovery or default, "discovery report")
        pipe.discovery = read_discovery_report(report)
    return pipe


def _run_stage(args, stage: str, action) -> int:
    try:
        pipe = _stage_pipeline(args, stage)
        action(pipe)
    except StageError:
        raise
    except (ValueError, OSError) as exc:
        raise StageError(stage, str(exc)) from exc
    for key, path in sorted(pipe.artifacts.items()):
        print(f"{key}: {path}")
    return 0


def cmd_run(args) -> int:
    bundle = run_pipeline(_config(args))
    for key, path in sorted(bundle.artifacts.items()):
        print(f"{key}: {path}")
    return 0


def cmd_discover(args) -> int:
    return _run_stage(args, "DISCOVERY", lambda p: p.discover())


def cmd_who(args) -> int:
    return _run_stage(args, "WHO", lambda p: p.who())


def cmd_didwhat(args) -> int:
    return _run_stage(args, "DID WHAT", lambda p: p.did_what())


def cmd_towhom(args) -> int:
    return _run_stage(args, "TO WHOM", lambda p: p.to_whom())


def cmd_why(args) -> int:
    def action(pipe: Pipeline):
        pipe.why()
        if args.sweep:
            cfg = pipe.config
            stopwords = load_stopwords(cfg.stopwords) if cfg.stopwords else default_stopwords()
            ds = preprocess(pipe.load().tweets_by(pipe._coordinated(required=True)), stopwords)
            scores = coherence_sweep(ds, range(args.sweep_min, args.sweep_max + 1),
                                     iters=cfg.lda_iters, seed=cfg.lda_seed, beta=cfg.lda_beta)
            path = pipe._path("coherence_sweep", "coherence_sweep.csv")
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["K", "mean_umass_coherence"])
                w.writerows([k, f"{v:.6f}"] for k, v in scores.items())

    return _run_stage(args, "WHY", action)


def cmd_impact(args) -> int:
    return _run_stage(args, "IMPACT", lambda p: p.impact())


def cmd_synth(args) -> int:
    try:
        cfg = CampaignConfig.load(args.config) if args.config else CampaignConfig()
        if args.seed is not None:
            cfg.seed = args.seed
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        generate_to_files(cfg, out / "corpus.jsonl", out / "truth.json")
    except (ConfigError, ValueError, OSError) as exc:
        raise StageError("SYNTH", str(exc)) from exc
    print(f"corpus: {out / 'corpus.jsonl'}")
    print(f"truth: {out / 'truth.json'}")
    return 0


def cmd_stats(args) -> int:
    try:
        corpus = load_corpus(_require(args.input, "input corpus"), args.bot_threshold)
        rows = [("Full", corpus_stats(corpus, None, args.bot_threshold))]
        if args.agents:
            text = _require(args.agents, "agent list").read_text(encoding="utf-8")
            agents = {line.strip() for line in text.splitlines() if line.strip()}
            rows.append((args.label, corpus_stats(corpus, agents, args.bot_threshold)))
    except (ValueError, OSError) as exc:
        raise StageError("WHO", str(exc)) from exc
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        csv.writer(fh, lineterminator="\n").writerows(format_stats_rows(rows))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hashtrace", description=__doc__)
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def stage(name, func, help_text, upstream=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="pipeline config (YAML)")
        p.add_argument("--input", help="tweet corpus (JSONL)")
        p.add_argument("--out", help="run directory for outputs")
        if upstream:
            p.add_argument("--discovery", help="discovery report (default: <out>/discovery.json)")
        p.set_defaults(func=func)
        return p

    p = stage("run", cmd_run, "run all six stages", upstream=False)
    p = stage("discover", cmd_discover, "find coordinated agents", upstream=False)
    p.add_argument("--discovery-days", type=int)
    p.add_argument("--louvain-seed", type=int)
    stage("who", cmd_who, "corpus statistics and burst profiles")
    stage("didwhat", cmd_didwhat, "maneuver comparison")
    stage("towhom", cmd_towhom, "targets and correlation table")
    p = stage("why", cmd_why, "topic model of coordinated tweets")
    p.add_argument("--lda-k", type=int)
    p.add_argument("--lda-iters", type=int)
    p.add_argument("--lda-seed", type=int)
    p.add_argument("--sweep", action="store_true", help="also write coherence over a range of K")
    p.add_argument("--sweep-min", type=int, default=2)
    p.add_argument("--sweep-max", type=int, default=8)
    stage("impact", cmd_impact, "E/I polarization report")

    p = sub.add_parser("synth", help="generate a synthetic campaign corpus")
    p.add_argument("--config", help="campaign config (YAML)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="directory for corpus.jsonl and truth.json")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("stats", help="dataset-summary rows for a corpus and an agent list")
    p.add_argument("--input", required=True)
    p.add_argument("--agents", help="file with one agent id per line")
    p.add_argument("--label", default="Coordinated agents")
    p.add_argument("--bot-threshold", type=float, default=0.5)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: [CONFIG] {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
