import json
from pathlib import Path

import pytest

from orch.cli import build_parser, main

from helpers import hier_finish_entries, hier_step_entries


def write_script(path, entries):
    lines = [json.dumps({"adapter": a, "reply": r}) for a, r in entries]
    Path(path).write_text("\n".join(lines) + "\n")


def write_config(tmp_path, sandbox_dir, backend="mock:", toolsets=("filesystem",),
                 session_lines=()):
    blocks = [f'backend = "{backend}"']
    for ts in toolsets:
        blocks.append(f'''
[[toolsets]]
toolset_id = "{ts}"
transport = "builtin"
builtin = "{ts}"
allowed_roots = ["{sandbox_dir}"]
timeout_ms = 5000
''')
    if session_lines:
        blocks.append("[session]\n" + "\n".join(session_lines))
    config = tmp_path / "app.toml"
    config.write_text("\n".join(blocks))
    return config


@pytest.fixture
def fs_run_setup(tmp_path, sandbox_dir):
    script = tmp_path / "script.jsonl"
    write_script(script, hier_step_entries("filesystem", "read_file", {"path": "a.txt"},
                                           routed=False)
                 + hier_finish_entries("filesystem", "a.txt says hello.", routed=False))
    config = write_config(tmp_path, sandbox_dir, backend=f"mock:{script}")
    return config


def test_run_writes_trace_and_exits_zero(fs_run_setup, tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    code = main(["run", "--query", "what is in a.txt?", "--config", str(fs_run_setup),
                 "--trace", str(trace)])
    assert code == 0
    assert trace.exists()
    out = json.loads(capsys.readouterr().out)
    assert out["terminated_by"] == "summarize"
    assert out["steps"] == 1


def test_run_missing_config_is_domain_error(capsys, tmp_path):
    code = main(["run", "--query", "q", "--config", str(tmp_path / "nope.toml")])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("error: ") and "\n" not in err.strip()


def test_unknown_subcommand_exits_two():
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 2


def test_every_subcommand_help_lists_flags(capsys):
    expected = {
        "run": ["--query", "--config", "--max-steps", "--flat", "--trace"],
        "gen-data": ["--config", "--toolset", "--per-tool", "--out"],
        "extract": ["--config", "--trajectories", "--out", "--split", "--test", "--seed"],
        "judge": ["--trace", "--truth", "--llm", "--backend", "--tool-descriptions"],
        "bench": ["--suite", "--config", "--jobs", "--out"],
        "serve-manifest": ["--config", "--out", "--artifacts-dir"],
    }
    for command, flags in expected.items():
        with pytest.raises(SystemExit) as excinfo:
            build_parser().parse_args([command, "--help"])
        assert excinfo.value.code == 0
        help_text = capsys.readouterr().out
        for flag in flags:
            assert flag in help_text, f"{command} --help missing {flag}"


def test_help_golden(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--help"])
    help_text = capsys.readouterr().out
    golden = Path(__file__).parent / "data" / "help_top.txt"
    assert help_text == golden.read_text(encoding="utf-8")


def test_gen_data_command(tmp_path, sandbox_dir, capsys):
    replies = []
    for i in range(12 * 2):
        replies.append(("base", f"please handle workspace item number {i}"))
    script = tmp_path / "gen.jsonl"
    write_script(script, replies)
    config = write_config(tmp_path, sandbox_dir, backend=f"mock:{script}")
    out = tmp_path / "queries.jsonl"
    code = main(["gen-data", "--config", str(config), "--toolset", "filesystem",
                 "--per-tool", "2", "--out", str(out)])
    assert code == 0
    queries = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(queries) == 24
    tools = {q["tool"] for q in queries}
    assert len(tools) == 12


def test_extract_command(tmp_path, sandbox_dir, capsys):
    config = write_config(tmp_path, sandbox_dir)
    traces = tmp_path / "traces"
    traces.mkdir()
    from orch.orchestrator import write_trace
    from test_dataset import make_trajectory

    for i in range(10):
        traj = make_trajectory(2, toolset_id="filesystem",
                               tools=("read_file", "get_file_info"))
        traj.steps[0].arguments = {"path": "a.txt"}
        traj.steps[1].arguments = {"path": "a.txt"}
        write_trace(traces / f"t{i}.jsonl", traj)
    out_dir = tmp_path / "dataset"
    code = main(["extract", "--config", str(config), "--trajectories", str(traces),
                 "--out", str(out_dir), "--split", "0.8", "--test", "2", "--seed", "1"])
    assert code == 0
    stats = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert stats["reserved_test_queries"] == 2
    assert stats["train_trajectories"] == 6
    assert stats["validation_trajectories"] == 2
    assert (out_dir / "train.jsonl").exists()
    assert (out_dir / "validation.jsonl").exists()
    assert (out_dir / "test_queries.jsonl").exists()


def test_judge_command(tmp_path, sandbox_dir, fs_run_setup, capsys):
    trace = tmp_path / "trace.jsonl"
    main(["run", "--query", "read a.txt", "--config", str(fs_run_setup),
          "--trace", str(trace)])
    capsys.readouterr()
    truth = tmp_path / "truth.json"
    truth.write_text(json.dumps({
        "fs_status": {"a.txt": {"type": "file", "size": 14, "content": "hello sandbox\n"}},
        "requirements": [{"id": "r1", "path": "a.txt", "kind": "content",
                          "satisfied_by": ["read_file"]}],
    }))
    code = main(["judge", "--trace", str(trace), "--truth", str(truth)])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["score"] == 10
    assert report["coverage_percent"] == 100.0


def test_serve_manifest_command(tmp_path, sandbox_dir, capsys):
    config = write_config(tmp_path, sandbox_dir, toolsets=("filesystem", "notion"))
    out = tmp_path / "manifest.json"
    code = main(["serve-manifest", "--config", str(config), "--out", str(out)])
    assert code == 0
    entries = json.loads(out.read_text())
    ids = {e["adapter_id"] for e in entries}
    assert "sel:filesystem" in ids
    assert "arg:filesystem:read_file" in ids
    assert "sel:notion" in ids
    # one selector per toolset + one argument adapter per tool
    assert len(entries) == 2 + 12 + 9


def test_env_override(tmp_path, sandbox_dir, monkeypatch):
    from orch.config import load_config

    config_path = write_config(tmp_path, sandbox_dir, session_lines=["max_steps = 4"])
    monkeypatch.setenv("ORCH_MAX_STEPS", "9")
    monkeypatch.setenv("ORCH_ADAPTER_POLICY", "base")
    config = load_config(config_path)
    assert config.session.max_steps == 9
    assert config.session.adapter_policy == "base"


def bench_task(name):
    args = {"path": "a.txt"}
    return {
        "name": name,
        "query": "read a.txt",
        "truth": {
            "fs_status": {"a.txt": {"type": "file", "size": 14,
                                    "content": "hello sandbox\n"}},
            "requirements": [{"id": "r1", "path": "a.txt", "kind": "content",
                              "satisfied_by": ["read_file"]}],
        },
        "replies": {
            "flat-base": [
                {"adapter": "base", "reply": "read_file"},
                {"adapter": "base", "reply": json.dumps(args)},
                {"adapter": "base", "reply": "summarize"},
                {"adapter": "base", "reply": "done"},
            ],
            "hier-base": [
                {"adapter": "base", "reply": "read_file"},
                {"adapter": "base", "reply": json.dumps(args)},
                {"adapter": "base", "reply": "summarize"},
                {"adapter": "base", "reply": "done"},
            ],
            "hier-single": [
                {"adapter": "sel:filesystem", "reply": "read_file"},
                {"adapter": "sel:filesystem", "reply": json.dumps(args)},
                {"adapter": "sel:filesystem", "reply": "summarize"},
                {"adapter": "base", "reply": "done"},
            ],
            "hier-decoupled": [
                {"adapter": "sel:filesystem", "reply": "read_file"},
                {"adapter": "arg:filesystem:read_file", "reply": json.dumps(args)},
                {"adapter": "sel:filesystem", "reply": "summarize"},
                {"adapter": "base", "reply": "done"},
            ],
        },
    }


def test_bench_four_configurations(tmp_path, sandbox_dir, capsys):
    config = write_config(tmp_path, sandbox_dir)
    suite = tmp_path / "suite"
    suite.mkdir()
    for i in range(2):
        (suite / f"task_{i}.json").write_text(json.dumps(bench_task(f"task_{i}")))
    out = tmp_path / "bench.json"
    code = main(["bench", "--suite", str(suite), "--config", str(config),
                 "--out", str(out)])
    assert code == 0
    table = capsys.readouterr().out
    for name in ("flat-base", "hier-base", "hier-single", "hier-decoupled"):
        assert name in table
    results = json.loads(out.read_text())
    assert results["tasks"] == 2
    assert set(results["aggregate"]) == {"flat-base", "hier-base", "hier-single",
                                         "hier-decoupled"}
    assert all(v == 100.0 for v in results["aggregate"].values())
