#!/usr/bin/env python3
"""Run the four-configuration routing/adapter ablation on a tiny task suite.

Builds a temp sandbox plus two bench tasks with canned replies for each
configuration, then invokes the `bench` subcommand so the output matches
what `orch bench` prints in real use.
"""

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from orch.cli import main as cli_main


def replies_for(args):
    serialized = json.dumps(args)
    return {
        "flat-base": [
            {"adapter": "base", "reply": "read_file"},
            {"adapter": "base", "reply": serialized},
            {"adapter": "base", "reply": "summarize"},
            {"adapter": "base", "reply": "done"},
        ],
        "hier-base": [
            {"adapter": "base", "reply": "read_file"},
            {"adapter": "base", "reply": serialized},
            {"adapter": "base", "reply": "summarize"},
            {"adapter": "base", "reply": "done"},
        ],
        "hier-single": [
            {"adapter": "sel:filesystem", "reply": "read_file"},
            {"adapter": "sel:filesystem", "reply": serialized},
            {"adapter": "sel:filesystem", "reply": "summarize"},
            {"adapter": "base", "reply": "done"},
        ],
        "hier-decoupled": [
            {"adapter": "sel:filesystem", "reply": "read_file"},
            {"adapter": "arg:filesystem:read_file", "reply": serialized},
            {"adapter": "sel:filesystem", "reply": "summarize"},
            {"adapter": "base", "reply": "done"},
        ],
    }


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        sandbox = tmp / "sandbox"
        sandbox.mkdir()
        (sandbox / "a.txt").write_text("hello sandbox\n")

        config = tmp / "app.toml"
        config.write_text(f'''backend = "mock:"

[[toolsets]]
toolset_id = "filesystem"
transport = "builtin"
builtin = "filesystem"
allowed_roots = ["{sandbox}"]
timeout_ms = 5000
''')

        suite = tmp / "suite"
        suite.mkdir()
        for i in range(2):
            task = {
                "name": f"task_{i}",
                "query": "read a.txt",
                "truth": {
                    "fs_status": {"a.txt": {"type": "file", "size": 14,
                                            "content": "hello sandbox\n"}},
                    "requirements": [{"id": "r1", "path": "a.txt", "kind": "content",
                                      "satisfied_by": ["read_file"]}],
                },
                "replies": replies_for({"path": "a.txt"}),
            }
            (suite / f"task_{i}.json").write_text(json.dumps(task))

        out = tmp / "bench.json"
        code = cli_main(["bench", "--suite", str(suite), "--config", str(config),
                         "--out", str(out)])
        if code == 0:
            print(json.dumps(json.loads(out.read_text()), indent=2))
        return code


if __name__ == "__main__":
    raise SystemExit(main())
