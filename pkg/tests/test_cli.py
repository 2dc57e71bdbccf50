import csv
import json

import pytest
import yaml

from hashtrace.cli import main
from hashtrace.pipeline import PipelineConfig, StageError, run_pipeline
from hashtrace.synthgen import CampaignConfig, generate_to_files

SMALL = dict(n_organic_agents=150, n_coordinated_agents=12, n_influencers=3)


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("syn")
    generate_to_files(CampaignConfig(**SMALL), d / "corpus.jsonl", d / "truth.json")
    return d


def fast_config(corpus_dir, out):
    return PipelineConfig(input=str(corpus_dir / "corpus.jsonl"), output_dir=str(out),
                          lda_k=2, lda_iters=30)


class TestRunPipeline:
    def test_all_artifacts(self, small_corpus, tmp_path):
        bundle = run_pipeline(fast_config(small_corpus, tmp_path / "run"))
        expected = {"discovery", "stats", "burst", "maneuvers", "correlations", "topics", "impact",
                    "hashtag_graph", "communication_graph", "manifest"}
        assert expected <= set(bundle.artifacts)
        assert all(p.is_file() for p in bundle.artifacts.values())
        manifest = json.loads(bundle.artifacts["manifest"].read_text())
        assert manifest["seeds"] == {"louvain": 0, "lda": 0}
        assert "output_dir" not in manifest["config"]
        truth = json.loads((small_corpus / "truth.json").read_text())
        assert set(bundle.discovery.coordinated_agents) == set(truth["coordinated"])

    def test_empty_input_fails_at_discovery(self, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        with pytest.raises(StageError) as err:
            run_pipeline(PipelineConfig(input=str(empty), output_dir=str(tmp_path / "o")))
        assert err.value.stage == "DISCOVERY" and "zero tweets" in err.value.cause

    def test_failure_keeps_earlier_outputs(self, small_corpus, tmp_path):
        cfg = fast_config(small_corpus, tmp_path / "run")
        cfg.lda_k = 10_000
        with pytest.raises(StageError) as err:
            run_pipeline(cfg)
        assert err.value.stage == "WHY"
        assert (tmp_path / "run" / "correlations.csv").is_file()
        assert not (tmp_path / "run" / "manifest.json").exists()

    def test_invalid_config(self, tmp_path):
        with pytest.raises(StageError) as err:
            run_pipeline(PipelineConfig(input=str(tmp_path / "missing.jsonl"), bot_threshold=2))
        assert "bot_threshold" in err.value.cause and "input file" in err.value.cause

    def test_config_unknown_key(self):
        with pytest.raises(ValueError):
            PipelineConfig.from_dict({"lda_topics": 3})

    def test_themes_linked(self, small_corpus, tmp_path):
        bundle = run_pipeline(fast_config(small_corpus, tmp_path / "run"))
        assert any(r.theme is not None for r in bundle.impact.rows)


class TestCommands:
    def test_synth(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text(yaml.safe_dump(SMALL))
        assert main(["synth", "--config", str(cfg), "--seed", "7", "--out", str(tmp_path / "s")]) == 0
        assert (tmp_path / "s" / "corpus.jsonl").is_file() and (tmp_path / "s" / "truth.json").is_file()

    def test_discover(self, small_corpus, tmp_path):
        out = tmp_path / "d"
        assert main(["discover", "--input", str(small_corpus / "corpus.jsonl"), "--out", str(out)]) == 0
        assert (out / "discovery.json").is_file() and (out / "hashtags.graphml").is_file()

    def test_stage_chain(self, small_corpus, tmp_path):
        out, corpus = str(tmp_path / "r"), str(small_corpus / "corpus.jsonl")
        assert main(["discover", "--input", corpus, "--out", out]) == 0
        for cmd in ("who", "didwhat", "towhom", "impact"):
            assert main([cmd, "--input", corpus, "--out", out]) == 0
        assert main(["why", "--input", corpus, "--out", out, "--lda-k", "2", "--lda-iters", "20",
                     "--sweep", "--sweep-max", "3"]) == 0
        for name in ("stats.csv", "burst.csv", "maneuvers.csv", "correlations.csv", "impact.csv",
                     "topics.json", "coherence_sweep.csv"):
            assert (tmp_path / "r" / name).is_file()

    def test_missing_upstream_named(self, small_corpus, tmp_path, capsys):
        rc = main(["who", "--input", str(small_corpus / "corpus.jsonl"), "--out", str(tmp_path / "x")])
        assert rc != 0
        assert "discovery.json" in capsys.readouterr().err

    def test_stats(self, small_corpus, tmp_path, capsys):
        truth = json.loads((small_corpus / "truth.json").read_text())
        agents = tmp_path / "coordinated.list"
        agents.write_text("\n".join(truth["coordinated"]) + "\n")
        assert main(["stats", "--input", str(small_corpus / "corpus.jsonl"), "--agents", str(agents)]) == 0
        rows = list(csv.reader(capsys.readouterr().out.splitlines()))
        assert rows[0] == ["Dataset", "Num Agents", "Num Tweets", "Bot Percentage (%)"]
        assert rows[2][0] == "Coordinated agents" and rows[2][1] == "12"

    def test_run_with_config_file(self, small_corpus, tmp_path):
        cfg = tmp_path / "p.yaml"
        cfg.write_text(yaml.safe_dump({"input": str(small_corpus / "corpus.jsonl"), "lda_k": 2,
                                       "lda_iters": 20}))
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 0
        assert (tmp_path / "r" / "manifest.json").is_file()

    def test_bad_config_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "p.yaml"
        cfg.write_text("nonsense_key: 1\n")
        assert main(["run", "--config", str(cfg)]) == 2
        assert "nonsense_key" in capsys.readouterr().err

    def test_empty_input_exit_code(self, tmp_path, capsys):
        (tmp_path / "e.jsonl").write_text("")
        assert main(["run", "--input", str(tmp_path / "e.jsonl"), "--out", str(tmp_path / "o")]) == 2
        assert "[DISCOVERY]" in capsys.readouterr().err
