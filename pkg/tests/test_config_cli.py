"""Config parsing and CLI behavior: exit codes, stdout purity, overrides."""

from __future__ import annotations

import pytest

from clarion.cli import run_command
from clarion.config import Config, load_config, parse_scorers
from clarion.errors import ConfigError

from conftest import synthetic_corpus, write_bank_tsv, write_train_tsv


class TestConfig:
    def test_defaults(self):
        cfg = Config()
        assert cfg.bm25_k1 == 1.2
        assert cfg.recall_bm25 == 100
        assert cfg.turn_limit == 3
        assert cfg.k == 30

    def test_load_types_and_comments(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text(
            "# paths\n"
            "bank = data/bank.tsv\n"
            "bm25_k1 = 0.9   # tuned down\n"
            "recall_bm25 = 50\n"
            "classifier_fallback = true\n"
            "\n"
            "metrics = mrr@100,recall@30\n",
            encoding="utf-8",
        )
        cfg = load_config(str(path))
        assert cfg.bank == "data/bank.tsv"
        assert cfg.bm25_k1 == 0.9
        assert cfg.recall_bm25 == 50
        assert cfg.classifier_fallback is True
        assert cfg.metric_list() == ["mrr@100", "recall@30"]

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("no_such_key = 5\n", encoding="utf-8")
        with pytest.raises(ConfigError) as exc:
            load_config(str(path))
        assert ":1:" in str(exc.value)

    def test_bad_value_type(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("recall_bm25 = fifty\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_missing_equals(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("just a line\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_validation(self):
        with pytest.raises(ConfigError):
            Config(bm25_k1=0.0)
        with pytest.raises(ConfigError):
            Config(recall_bm25=-1)
        with pytest.raises(ConfigError):
            Config(bm25_b=2.0)


class TestParseScorers:
    def test_full_spec(self, tmp_path, monkeypatch):
        monkeypatch.delenv("CLARION_SCORER_URL", raising=False)
        handles = parse_scorers(f"lexical,precomputed:{tmp_path}/s.tsv,remote:http://h:1")
        assert [h.kind for h in handles] == ["lexical", "precomputed", "remote"]
        assert handles[1].path == f"{tmp_path}/s.tsv"
        assert handles[2].base_url == "http://h:1"

    def test_env_overrides_remote_url(self, monkeypatch):
        monkeypatch.setenv("CLARION_SCORER_URL", "http://override:9")
        [handle] = parse_scorers("remote:http://original:1")
        assert handle.base_url == "http://override:9"

    def test_env_supplies_missing_url(self, monkeypatch):
        monkeypatch.setenv("CLARION_SCORER_URL", "http://fromenv:9")
        [handle] = parse_scorers("remote")
        assert handle.base_url == "http://fromenv:9"

    def test_empty_spec_rejected(self):
        with pytest.raises(ConfigError):
            parse_scorers("")
        with pytest.raises(ConfigError):
            parse_scorers(" , ")

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            parse_scorers("neural:foo")

    def test_precomputed_needs_path(self):
        with pytest.raises(ConfigError):
            parse_scorers("precomputed")


@pytest.fixture
def corpus_files(tmp_path):
    bank, records = synthetic_corpus(60, 20)
    bank_path = tmp_path / "bank.tsv"
    train_path = tmp_path / "train.tsv"
    write_bank_tsv(bank_path, {qid: bank[qid] for qid in bank})
    write_train_tsv(train_path, records)
    return str(bank_path), str(train_path)


class TestCliExitCodes:
    def test_unknown_subcommand(self, capsys):
        assert run_command(["frobnicate"]) == 1
        assert capsys.readouterr().out == ""

    def test_missing_required_flag(self, capsys):
        assert run_command(["build-index"]) == 1

    def test_help_exits_zero(self, capsys):
        assert run_command(["--help"]) == 0

    def test_missing_file_is_data_error(self, tmp_path, capsys):
        code = run_command(
            ["build-index", "--bank", str(tmp_path / "nope.tsv"), "--train", "x", "--out", "y"]
        )
        assert code == 2
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "error" in captured.err

    def test_malformed_data_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bank.tsv"
        bad.write_text("question_id\tquestion\nq1\n", encoding="utf-8")
        train = tmp_path / "train.tsv"
        train.write_text(
            "topic_id\tinitial_request\ttopic_desc\tfacet_id\tquestion_id\tquestion\tanswer\n",
            encoding="utf-8",
        )
        code = run_command(
            ["build-index", "--bank", str(bad), "--train", str(train), "--out", str(tmp_path / "i")]
        )
        assert code == 2

    def test_success_is_zero(self, corpus_files, tmp_path):
        bank_path, train_path = corpus_files
        out = tmp_path / "idx.bin"
        code = run_command(
            ["build-index", "--bank", bank_path, "--train", train_path, "--out", str(out)]
        )
        assert code == 0
        assert out.exists() and out.stat().st_size > 0


class TestCliPipelines:
    def test_build_index_then_recall(self, corpus_files, tmp_path, capsys):
        bank_path, train_path = corpus_files
        idx = str(tmp_path / "idx.bin")
        assert run_command(["build-index", "--bank", bank_path, "--train", train_path, "--out", idx]) == 0
        capsys.readouterr()
        code = run_command(
            [
                "recall",
                "--bank", bank_path,
                "--train", train_path,
                "--index", idx,
                "--request", "do you want music travel",
                "--n-bm25", "5",
                "--n-short", "5",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0] == "rank\tquestion_id\tsource\tscore"
        assert 1 < len(lines) <= 11
        for expected_rank, line in enumerate(lines[1:], start=1):
            rank, qid, source, score = line.split("\t")
            assert int(rank) == expected_rank
            assert source in ("bm25", "short_pool")
            float(score)

    def test_rank_emits_k_rows(self, corpus_files, capsys):
        bank_path, train_path = corpus_files
        code = run_command(
            [
                "rank",
                "--bank", bank_path,
                "--train", train_path,
                "--context", "do you want music travel weather",
                "--k", "30",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert len(lines) == 30
        assert all(len(line.split("\t")) == 4 for line in lines)

    def test_build_dataset_writes_seeded_file(self, corpus_files, tmp_path, capsys):
        bank_path, train_path = corpus_files
        scores = tmp_path / "scores.tsv"
        scores.write_text("", encoding="utf-8")
        out = tmp_path / "ds.tsv"
        code = run_command(
            [
                "build-dataset",
                "--bank", bank_path,
                "--train", train_path,
                "--scores", str(scores),
                "--seed", "13",
                "--n-bm25", "3",
                "--n-random", "3",
                "--out", str(out),
            ]
        )
        assert code == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# seed=13"
        assert lines[1] == "context\tquestion\tlabel\tmrr100\tndcg3\tprovenance"

    def test_build_understanding(self, corpus_files, tmp_path):
        bank_path, train_path = corpus_files
        scores = tmp_path / "scores.tsv"
        # cover one record: first asked question of topic T000
        with open(train_path, encoding="utf-8") as f:
            first = f.read().splitlines()[1].split("\t")
        scores.write_text(
            f"{first[0]}\t{first[3]}\t{first[4]}\tP5\t0.0\n", encoding="utf-8"
        )
        out = tmp_path / "und.tsv"
        code = run_command(
            [
                "build-understanding",
                "--train", train_path,
                "--scores", str(scores),
                "--out", str(out),
            ]
        )
        assert code == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "question\tanswer\tlabel"
        assert lines[1].endswith("need_clarify")

    def test_evaluate(self, tmp_path, capsys):
        run_path = tmp_path / "run.tsv"
        run_path.write_text("t1 Q0 d1 1 0.9 sys\nt1 Q0 d2 2 0.5 sys\n", encoding="utf-8")
        qrels_path = tmp_path / "qrels.txt"
        qrels_path.write_text("t1 0 d2 1\n", encoding="utf-8")
        code = run_command(
            ["evaluate", "--run", str(run_path), "--qrels", str(qrels_path), "--metric", "mrr"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "mrr\tt1\t0.500000" in out
        assert "mrr\tall\t0.500000" in out

    def test_simulate(self, corpus_files, tmp_path, capsys):
        bank_path, train_path = corpus_files
        requests = tmp_path / "reqs.txt"
        requests.write_text("do you want music travel\n", encoding="utf-8")
        code = run_command(
            [
                "simulate",
                "--bank", bank_path,
                "--train", train_path,
                "--requests", str(requests),
                "--turn-limit", "1",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0] == "# conversation 1"
        assert lines[1] == "0\tuser\tdo you want music travel"
        assert lines[-1].endswith("turn_limit")

    def test_config_file_flag_precedence(self, corpus_files, tmp_path, capsys):
        bank_path, train_path = corpus_files
        cfg = tmp_path / "c.cfg"
        cfg.write_text(
            f"bank = {bank_path}\ntrain = {train_path}\nrecall_bm25 = 2\nrecall_short = 0\n",
            encoding="utf-8",
        )
        code = run_command(
            ["recall", "--config", str(cfg), "--request", "do you want music travel"]
        )
        assert code == 0
        assert len(capsys.readouterr().out.splitlines()) == 3  # header + 2 bm25 rows

        code = run_command(
            [
                "recall",
                "--config", str(cfg),
                "--request", "do you want music travel",
                "--n-bm25", "1",
            ]
        )
        assert code == 0
        assert len(capsys.readouterr().out.splitlines()) == 2  # flag wins over config

    def test_config_missing_input_reported(self, tmp_path, capsys):
        code = run_command(["recall", "--request", "anything"])
        assert code == 2
        assert "bank" in capsys.readouterr().err
