from __future__ import annotations

import json

import pytest

from skillgraph.cli import build_parser, main
from skillgraph.config import ENV_CONFIG, PipelineConfig, load_config, parse_config_text
from skillgraph.errors import ConfigError


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_pipeline(tmp_path, capsys, seed=7, out_name="out"):
    data = tmp_path / "data"
    out = tmp_path / out_name
    code, _, err = run_cli(capsys, "synth", "--seed", str(seed), "--jobs", "40",
                           "--courses", "12", "--skills", "24", "--alignment", "0.4",
                           "--out", str(data))
    assert code == 0, err
    for argv in (
        ["ingest", "--courses", str(data / "courses.csv"), "--jobs", str(data / "jobs.csv"),
         "--skills", str(data / "skills.csv"), "--enrollments", str(data / "enrollments.csv"),
         "--out", str(out)],
        ["build", "--out", str(out)],
        ["communities", "--out", str(out), "--seed", "3"],
        ["link", "--out", str(out)],
    ):
        code, _, err = run_cli(capsys, *argv)
        assert code == 0, (argv, err)
    return data, out


class TestPipeline:
    def test_full_pipeline_and_recommend(self, tmp_path, capsys):
        _data, out = run_pipeline(tmp_path, capsys)
        code, stdout, _ = run_cli(capsys, "recommend", "--out", str(out),
                                  "--scenario", "1", "--goal", "topic-0 engineer",
                                  "--top", "5")
        assert code == 0
        lines = stdout.strip().splitlines()
        assert lines[0] == "rank,node_id,score"
        assert 1 <= len(lines) - 1 <= 5
        assert all(line.split(",")[1].startswith("C") for line in lines[1:])

    def test_rerun_is_byte_identical(self, tmp_path, capsys):
        _d1, out1 = run_pipeline(tmp_path, capsys, out_name="out1")
        _d2, out2 = run_pipeline(tmp_path, capsys, out_name="out2")
        files1 = sorted(p.name for p in out1.iterdir())
        files2 = sorted(p.name for p in out2.iterdir())
        assert files1 == files2
        for name in files1:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    def test_evaluate_with_ground_truth(self, tmp_path, capsys):
        data, out = run_pipeline(tmp_path, capsys)
        # rank for two topic queries, build a run file keyed like the truth
        import skillgraph.metrics as metrics
        runs = {}
        truth = metrics.load_judgments(data / "ground_truth.csv")
        for topic in (0, 1):
            code, stdout, _ = run_cli(capsys, "recommend", "--out", str(out),
                                      "--scenario", "1", "--goal", f"topic-{topic}",
                                      "--top", "10")
            assert code == 0
            ranked = [line.split(",")[1] for line in stdout.strip().splitlines()[1:]]
            query = next(q for q in sorted(truth) if truth[q] and
                         any(cid in truth[q] for cid in ranked))
            runs[query] = [(cid, 1.0 / (i + 1)) for i, cid in enumerate(ranked)]
        run_file = tmp_path / "runs.csv"
        metrics.write_runs(run_file, runs)
        code, stdout, _ = run_cli(capsys, "evaluate", "--judgments",
                                  str(data / "ground_truth.csv"), "--runs", str(run_file),
                                  "--missing", "irrelevant", "--out", str(out))
        assert code == 0
        payload = json.loads((out / "metrics.json").read_text())
        assert set(payload) == {"precision", "map", "map_at_5", "precision_at_10", "map_at_10"}
        assert "MAP" in stdout

    def test_link_dump_flag(self, tmp_path, capsys):
        _data, out = run_pipeline(tmp_path, capsys)
        code, _, _ = run_cli(capsys, "link", "--out", str(out), "--dump-links")
        assert code == 0
        assert (out / "links_dump.csv").read_text().startswith("source,target,raw_bm25,weight")

    def test_aggregate_jobs_by_title(self, tmp_path, capsys):
        _data, out = run_pipeline(tmp_path, capsys)
        plain = (out / "career.graph").read_text()
        code, stdout, _ = run_cli(capsys, "build", "--out", str(out),
                                  "--aggregate-jobs-by-title")
        assert code == 0
        aggregated = (out / "career.graph").read_text()
        assert aggregated != plain
        n_plain = sum(1 for line in plain.splitlines() if " job" in line)
        n_agg = sum(1 for line in aggregated.splitlines() if " job" in line)
        assert n_agg < n_plain  # postings sharing a title collapsed

    def test_recommend_debug_flag(self, tmp_path, capsys):
        _data, out = run_pipeline(tmp_path, capsys)
        code, stdout, err = run_cli(capsys, "recommend", "--out", str(out),
                                    "--scenario", "1", "--goal", "topic-0",
                                    "--top", "3", "--debug")
        assert code == 0
        assert stdout.startswith("rank,node_id,score")
        assert "base candidates" in err


class TestErrors:
    def test_missing_goal_is_usage_error(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "recommend", "--out", str(tmp_path),
                               "--scenario", "1", "--top", "5")
        assert code == 1
        assert "career goal" in err

    def test_unknown_subcommand(self, capsys):
        code, _, err = run_cli(capsys, "frobnicate")
        assert code == 1
        assert "invalid choice" in err

    def test_no_match_query_exits_one(self, tmp_path, capsys):
        _data, out = run_pipeline(tmp_path, capsys)
        code, _, err = run_cli(capsys, "recommend", "--out", str(out),
                               "--scenario", "1", "--goal", "quantum plumber", "--top", "3")
        assert code == 1
        assert "nearest titles" in err

    def test_internal_errors_exit_two(self, tmp_path, capsys, monkeypatch):
        import skillgraph.cli as cli
        monkeypatch.setattr(cli, "cmd_build", lambda cfg: 1 / 0)
        code, _, err = run_cli(capsys, "build", "--out", str(tmp_path))
        assert code == 2
        assert "internal error" in err

    def test_missing_input_file_exits_one(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "ingest", "--courses", str(tmp_path / "no.csv"),
                               "--jobs", "x", "--skills", "y", "--enrollments", "z",
                               "--out", str(tmp_path))
        assert code == 1
        assert "error" in err


class TestHelp:
    def test_every_subcommand_help(self, capsys):
        parser = build_parser()
        subcommands = ["ingest", "build", "communities", "link", "recommend",
                       "evaluate", "synth"]
        for name in subcommands:
            with pytest.raises(SystemExit) as exc:
                parser.parse_args([name, "--help"])
            assert exc.value.code == 0
            out = capsys.readouterr().out
            assert "--" in out


class TestConfig:
    def test_parse_and_overrides(self):
        text = "# comment\nteleport = 0.2\nseed = 9\naggregate_jobs_by_title = yes\n\n"
        values = parse_config_text(text)
        assert values == {"teleport": 0.2, "seed": 9, "aggregate_jobs_by_title": True}

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            parse_config_text("bogus = 1\n")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError, match="not a float"):
            parse_config_text("teleport = fast\n")
        with pytest.raises(ConfigError, match="not a boolean"):
            parse_config_text("aggregate_jobs_by_title = maybe\n")

    def test_range_validation(self):
        with pytest.raises(ConfigError):
            PipelineConfig(teleport=1.5)
        with pytest.raises(ConfigError):
            PipelineConfig(link_top_k=0)

    def test_env_config_used(self, tmp_path, monkeypatch):
        cfg_file = tmp_path / "cfg"
        cfg_file.write_text("seed = 31\n")
        monkeypatch.setenv(ENV_CONFIG, str(cfg_file))
        assert load_config().seed == 31
        assert load_config(overrides={"seed": 2}).seed == 2

    def test_flag_overrides_config_file(self, tmp_path, capsys, monkeypatch):
        cfg_file = tmp_path / "cfg"
        cfg_file.write_text(f"out_dir = {tmp_path / 'from_config'}\n")
        data = tmp_path / "data"
        code, _, _ = run_cli(capsys, "synth", "--seed", "1", "--jobs", "10",
                             "--courses", "6", "--skills", "12", "--alignment", "0.5",
                             "--out", str(data))
        assert code == 0
        code, _, err = run_cli(capsys, "ingest", "--config", str(cfg_file),
                               "--courses", str(data / "courses.csv"),
                               "--jobs", str(data / "jobs.csv"),
                               "--skills", str(data / "skills.csv"),
                               "--enrollments", str(data / "enrollments.csv"))
        assert code == 0, err
        assert (tmp_path / "from_config" / "courses.csv").exists()

    def test_missing_config_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="does not exist"):
            load_config(tmp_path / "absent.cfg")
