import json

import pytest

from homefetch.cli import (
    EXIT_CONFIG,
    EXIT_GENERATION,
    EXIT_IO,
    EXIT_MISMATCH,
    EXIT_OK,
    EXIT_SCHEMA,
    main,
)
from homefetch.eventlog import read_events, write_events
from homefetch.session import SUBTASKS
from homefetch.taskgen import validate_episode


def _run(tmp_path, *extra):
    out = tmp_path / "out"
    rc = main(["run", "--seed", "3", "--sessions", "2",
               "--out", str(out), *extra])
    return rc, out


class TestRun:
    def test_writes_artifacts_and_prints_row(self, tmp_path, capsys):
        rc, out = _run(tmp_path)
        assert rc == EXIT_OK
        printed = capsys.readouterr().out
        row = (out / "report.txt").read_text(encoding="ascii")
        assert printed == row
        assert row.endswith("\n") and " | " in row
        events = read_events(out / "episodes.jsonl")
        assert events[0]["event"] == "session_start"
        assert events[-1]["event"] == "session_end"
        assert {e["session"] for e in events} == {0, 1}
        summary = json.loads((out / "report.json").read_text())
        assert summary["label"] == "relational"
        assert summary["seed"] == 3
        assert summary["sessions"] == 2
        assert summary["row"] == row.strip()
        assert set(summary["tally"]) == set(SUBTASKS)
        assert summary["config"]["grounder"] == "relational"

    def test_default_out_directory(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        assert main(["run", "--seed", "3", "--sessions", "1"]) == EXIT_OK
        capsys.readouterr()
        assert (tmp_path / "runs" / "seed3-relational" /
                "episodes.jsonl").exists()

    def test_flag_overrides_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 9, "grounder": "oracle"}))
        out = tmp_path / "out"
        rc = main(["run", "--config", str(cfg), "--seed", "3",
                   "--sessions", "1", "--out", str(out)])
        assert rc == EXIT_OK
        capsys.readouterr()
        summary = json.loads((out / "report.json").read_text())
        assert summary["seed"] == 3
        assert summary["label"] == "oracle"

    def test_compat_counts_row(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["run", "--seed", "1", "--sessions", "2",
                   "--grounder", "keyword-baseline",
                   "--paper-compat-counts", "--out", str(out)])
        assert rc == EXIT_OK
        assert capsys.readouterr().out.strip() == \
            "100 (2/2) | 0 (0/0) | 0 (0/0) | 0 (0/0)"
        summary = json.loads((out / "report.json").read_text())
        assert summary["paper_compat_counts"] is True

    def test_unknown_config_key_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seeed": 1}))
        rc = main(["run", "--config", str(cfg)])
        assert rc == EXIT_CONFIG
        assert "unknown config key" in capsys.readouterr().err

    def test_generation_failure_exits_3(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(
            {"gen": {"objects_per_room": 0.0, "min_objects": 0,
                     "max_objects": 0}}))
        rc = main(["run", "--config", str(cfg), "--sessions", "1",
                   "--out", str(tmp_path / "out")])
        assert rc == EXIT_GENERATION
        assert "generation failed" in capsys.readouterr().err

    def test_bad_flag_value_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--grounder", "psychic"])
        assert exc.value.code == 2
        capsys.readouterr()

    def test_workers_flag_preserves_bytes(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--seed", "5", "--sessions", "3",
                     "--out", str(a)]) == EXIT_OK
        assert main(["run", "--seed", "5", "--sessions", "3",
                     "--workers", "2", "--out", str(b)]) == EXIT_OK
        capsys.readouterr()
        assert (a / "episodes.jsonl").read_bytes() == \
            (b / "episodes.jsonl").read_bytes()
        assert (a / "report.txt").read_bytes() == \
            (b / "report.txt").read_bytes()


class TestGenerate:
    def test_exports_dataset(self, tmp_path, capsys):
        out = tmp_path / "ds"
        rc = main(["generate", "--seed", "4", "--sessions", "2",
                   "--out", str(out)])
        assert rc == EXIT_OK
        assert capsys.readouterr().out.strip() == str(out / "manifest.json")
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["format"] == "homefetch-manifest/1"
        assert manifest["count"] == 2
        for name in manifest["episodes"]:
            rec = json.loads((out / name).read_text())
            assert validate_episode(rec) == []

    def test_deterministic_bytes(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["generate", "--seed", "4", "--sessions", "2",
                         "--out", str(out)]) == EXIT_OK
        capsys.readouterr()
        for name in ("manifest.json", "episode_0000.json",
                     "episode_0001.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_generation_failure_exits_3(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(
            {"gen": {"objects_per_room": 0.0, "min_objects": 0,
                     "max_objects": 0}}))
        rc = main(["generate", "--config", str(cfg),
                   "--out", str(tmp_path / "ds")])
        assert rc == EXIT_GENERATION
        capsys.readouterr()


class TestReport:
    def test_merges_and_sorts_labels(self, tmp_path, capsys):
        _, rel = _run(tmp_path)
        base = tmp_path / "base"
        assert main(["run", "--seed", "1", "--sessions", "2",
                     "--grounder", "keyword-baseline",
                     "--out", str(base)]) == EXIT_OK
        capsys.readouterr()
        rc = main(["report", str(rel / "episodes.jsonl"),
                   str(base / "episodes.jsonl")])
        assert rc == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("keyword-baseline | ")
        assert lines[1].startswith("relational | ")

    def test_self_merge_doubles_counts(self, tmp_path, capsys):
        _, out = _run(tmp_path)
        log = str(out / "episodes.jsonl")
        assert main(["report", log]) == EXIT_OK
        single = capsys.readouterr().out
        assert main(["report", log, log]) == EXIT_OK
        doubled = capsys.readouterr().out
        assert single != doubled
        assert "(4/4)" in doubled or "(0/4)" in doubled

    def test_empty_log_prints_zero_row(self, tmp_path, capsys):
        log = tmp_path / "empty.jsonl"
        log.write_text("")
        assert main(["report", str(log)]) == EXIT_OK
        assert capsys.readouterr().out.strip() == \
            "0 (0/0) | 0 (0/0) | 0 (0/0) | 0 (0/0)"

    def test_missing_file_exits_4(self, tmp_path, capsys):
        rc = main(["report", str(tmp_path / "nope.jsonl")])
        assert rc == EXIT_IO
        capsys.readouterr()

    def test_malformed_log_exits_5(self, tmp_path, capsys):
        log = tmp_path / "bad.jsonl"
        log.write_text('{"event": "session_start"}\nnot json\n')
        rc = main(["report", str(log)])
        assert rc == EXIT_SCHEMA
        capsys.readouterr()


class TestReplay:
    def test_verifies_run_log(self, tmp_path, capsys):
        _, out = _run(tmp_path)
        capsys.readouterr()
        rc = main(["replay", str(out / "episodes.jsonl")])
        assert rc == EXIT_OK
        assert capsys.readouterr().out.strip() == "replayed 2 session(s): match"

    def test_tampered_log_exits_6(self, tmp_path, capsys):
        _, out = _run(tmp_path)
        log = out / "episodes.jsonl"
        events = read_events(log)
        events[4]["clock_s"] = 123.456
        write_events(log, events)
        rc = main(["replay", str(log)])
        assert rc == EXIT_MISMATCH
        assert "replay mismatch" in capsys.readouterr().err

    def test_missing_file_exits_4(self, tmp_path, capsys):
        rc = main(["replay", str(tmp_path / "nope.jsonl")])
        assert rc == EXIT_IO
        capsys.readouterr()

    def test_malformed_log_exits_5(self, tmp_path, capsys):
        log = tmp_path / "bad.jsonl"
        log.write_text("{broken\n")
        rc = main(["replay", str(log)])
        assert rc == EXIT_SCHEMA
        capsys.readouterr()
