"""Command-line entry point: run, gen-data, extract, judge, bench,
serve-manifest."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from collections import defaultdict
from pathlib import Path
from typing import Dict, List

from . import dataset, judge
from .adapters import AdapterId, write_manifest
from .config import AppConfig, build_gateway, build_registry, load_config, load_script
from .errors import OrchError
from .gateway import Gateway, OpenAIBackend, ScriptedBackend
from .orchestrator import Session, SessionConfig, read_trace, write_trace

BENCH_CONFIGS = (
    ("flat-base", False, "base"),
    ("hier-base", True, "base"),
    ("hier-single", True, "single"),
    ("hier-decoupled", True, "decoupled"),
)


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _specs_by_toolset(registry) -> Dict[str, list]:
    return {ts: registry.list_tools(ts) for ts in registry.toolset_ids()}


# -- subcommands ----------------------------------------------------------------

def cmd_run(args) -> int:
    config = load_config(args.config)
    if args.max_steps is not None:
        config.session.max_steps = args.max_steps
    if args.flat:
        config.session.hierarchical = False
    registry = build_registry(config)
    try:
        gateway = build_gateway(config)
        session = Session(registry, gateway, config.session)
        trajectory = session.run(args.query)
        if args.trace:
            fd, tmp = tempfile.mkstemp(dir=Path(args.trace).resolve().parent)
            os.close(fd)
            write_trace(tmp, trajectory)
            os.replace(tmp, args.trace)
        print(json.dumps({
            "trajectory_id": trajectory.trajectory_id,
            "steps": len(trajectory.steps),
            "terminated_by": trajectory.terminated_by,
            "summary": trajectory.summary,
        }))
        return 0 if trajectory.terminated_by != "error" else 1
    finally:
        registry.close()


def cmd_gen_data(args) -> int:
    config = load_config(args.config)
    registry = build_registry(config)
    try:
        gateway = build_gateway(config)
        specs = registry.list_tools(args.toolset)
        global_names = [s.name for ts in registry.toolset_ids()
                        for s in registry.list_tools(ts)]
        queries: List[dataset.SyntheticQuery] = []
        for spec in specs:
            queries.extend(dataset.synthesize_queries(
                spec, args.per_tool, gateway, global_names))
        lines = [json.dumps(q.to_dict(), sort_keys=True) for q in queries]
        write_atomic(args.out, "\n".join(lines) + "\n")
        print(f"wrote {len(queries)} queries to {args.out}")
        return 0
    finally:
        registry.close()


def cmd_extract(args) -> int:
    config = load_config(args.config)
    registry = build_registry(config)
    try:
        specs = _specs_by_toolset(registry)
    finally:
        registry.close()
    trajectories = []
    for trace_path in sorted(Path(args.trajectories).glob("*.jsonl")):
        trajectories.append(read_trace(trace_path))
    if not trajectories:
        raise OrchError(f"no trajectory traces found in {args.trajectories}")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    # reserve a balanced test set (by first-step tool) before splitting
    reserved_ids: set = set()
    if args.test > 0:
        by_tool = defaultdict(list)
        for traj in trajectories:
            if traj.steps:
                by_tool[traj.steps[0].tool].append(dataset.SyntheticQuery(
                    tool=traj.steps[0].tool, toolset_id=traj.steps[0].toolset_id,
                    text=traj.query, id=traj.trajectory_id))
        reserved = dataset.reserve_test_set(by_tool, total=args.test, seed=args.seed)
        reserved_ids = {q.id for q in reserved}
        write_atomic(out_dir / "test_queries.jsonl",
                     "\n".join(json.dumps(q.to_dict(), sort_keys=True) for q in reserved) + "\n")

    remaining = [t for t in trajectories if t.trajectory_id not in reserved_ids]
    split = dataset.split_dataset(remaining, specs, ratio=args.split, seed=args.seed,
                                  system_prompt=config.session.system_prompt)
    dataset.write_instances(out_dir / "train.jsonl", split.train)
    dataset.write_instances(out_dir / "validation.jsonl", split.validation)
    for flag in dataset.lint_trajectories(remaining):
        print(f"review: {flag}", file=sys.stderr)
    print(json.dumps({
        "train_instances": len(split.train),
        "validation_instances": len(split.validation),
        "train_trajectories": len(split.train_trajectory_ids),
        "validation_trajectories": len(split.validation_trajectory_ids),
        "reserved_test_queries": len(reserved_ids),
    }))
    return 0


def cmd_judge(args) -> int:
    trajectory = read_trace(args.trace)
    truth = judge.GroundTruth.load(args.truth)
    if args.llm:
        if args.backend.startswith("mock:"):
            gateway = Gateway(ScriptedBackend(load_script(args.backend[len("mock:"):])))
        else:
            gateway = Gateway(OpenAIBackend(args.backend))
        descriptions = args.tool_descriptions or ""
        report = judge.llm_judge(trajectory, truth, descriptions, gateway)
    else:
        report = judge.check_coverage(truth, trajectory)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0


def _run_bench_task(config: AppConfig, task: dict, config_name: str,
                    hierarchical: bool, policy: str) -> judge.CoverageReport:
    replies = task["replies"]
    script = replies.get(config_name, replies.get("*")) if isinstance(replies, dict) else replies
    if script is None:
        raise OrchError(f"task {task.get('name', '?')} has no replies for {config_name}")
    registry = build_registry(config)
    try:
        gateway = Gateway(ScriptedBackend([(e["adapter"], e["reply"]) for e in script]))
        session_config = SessionConfig(
            max_steps=config.session.max_steps,
            hierarchical=hierarchical,
            retry_on_invalid_args=config.session.retry_on_invalid_args,
            system_prompt=config.session.system_prompt,
            adapter_policy=policy,
        )
        session = Session(registry, gateway, session_config)
        trajectory = session.run(task["query"])
        truth = judge.GroundTruth.from_dict(task["truth"])
        return judge.check_coverage(truth, trajectory)
    finally:
        registry.close()


def cmd_bench(args) -> int:
    config = load_config(args.config)
    tasks = []
    for task_path in sorted(Path(args.suite).glob("task_*.json")):
        task = json.loads(task_path.read_text(encoding="utf-8"))
        task.setdefault("name", task_path.stem)
        tasks.append(task)
    if not tasks:
        raise OrchError(f"no task_*.json files in {args.suite}")

    results = {}
    for config_name, hierarchical, policy in BENCH_CONFIGS:
        reports = []
        if args.jobs > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                reports = list(pool.map(
                    lambda t: _run_bench_task(config, t, config_name, hierarchical, policy),
                    tasks))
        else:
            reports = [_run_bench_task(config, t, config_name, hierarchical, policy)
                       for t in tasks]
        results[config_name] = judge.aggregate(reports)

    header = f"{'configuration':<18} {'tasks':>5} {'coverage score (%)':>20}"
    lines = [header, "-" * len(header)]
    for config_name, _, _ in BENCH_CONFIGS:
        lines.append(f"{config_name:<18} {len(tasks):>5} {results[config_name]:>20.1f}")
    table = "\n".join(lines)
    print(table)
    if args.out:
        write_atomic(args.out, json.dumps(
            {"tasks": len(tasks), "aggregate": results}, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_serve_manifest(args) -> int:
    config = load_config(args.config)
    registry = build_registry(config)
    try:
        artifacts = Path(args.artifacts_dir)
        entries = []
        for toolset_id in registry.toolset_ids():
            sel = AdapterId.selector(toolset_id)
            entries.append((sel, str(artifacts / f"{toolset_id}__selector")))
            for spec in registry.list_tools(toolset_id):
                arg = AdapterId.argument(toolset_id, spec.name)
                entries.append((arg, str(artifacts / f"{toolset_id}__{spec.name}")))
        fd, tmp = tempfile.mkstemp(dir=Path(args.out).resolve().parent)
        os.close(fd)
        write_manifest(tmp, entries)
        os.replace(tmp, args.out)
        print(f"wrote {len(entries)} adapter entries to {args.out}")
        return 0
    finally:
        registry.close()


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orch",
                                     description="Local hierarchical agent orchestration")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one agent session")
    p.add_argument("--query", required=True, help="natural-language task")
    p.add_argument("--config", required=True, help="TOML app config")
    p.add_argument("--max-steps", type=int, default=None, help="override session step budget")
    p.add_argument("--flat", action="store_true", help="disable hierarchical routing")
    p.add_argument("--trace", default=None, help="write the trajectory trace (JSONL) here")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("gen-data", help="synthesize per-tool training queries")
    p.add_argument("--config", required=True, help="TOML app config")
    p.add_argument("--toolset", required=True, help="toolset id to generate for")
    p.add_argument("--per-tool", type=int, default=1000, help="queries per tool")
    p.add_argument("--out", required=True, help="output queries JSONL")
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("extract", help="extract mask-annotated instances from traces")
    p.add_argument("--config", required=True, help="TOML app config")
    p.add_argument("--trajectories", required=True, help="directory of trace JSONL files")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--split", type=float, default=0.8, help="train fraction")
    p.add_argument("--test", type=int, default=50, help="reserved test queries (0 disables)")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed")
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("judge", help="score a trajectory against ground truth")
    p.add_argument("--trace", required=True, help="trajectory trace file")
    p.add_argument("--truth", required=True, help="ground-truth JSON file")
    p.add_argument("--llm", action="store_true", help="use the LLM judge instead of the oracle")
    p.add_argument("--backend", default="", help="judge backend URL or mock:<script>")
    p.add_argument("--tool-descriptions", default="", help="tool description text for the judge")
    p.set_defaults(fn=cmd_judge)

    p = sub.add_parser("bench", help="run the four-configuration ablation matrix")
    p.add_argument("--suite", required=True, help="directory of task_*.json files")
    p.add_argument("--config", required=True, help="TOML app config")
    p.add_argument("--jobs", type=int, default=1, help="bounded task fan-out")
    p.add_argument("--out", default=None, help="write the aggregate table as JSON here")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("serve-manifest", help="emit the adapter manifest for the serving backend")
    p.add_argument("--config", required=True, help="TOML app config")
    p.add_argument("--out", required=True, help="manifest JSON path")
    p.add_argument("--artifacts-dir", default="adapters", help="adapter artifact directory")
    p.set_defaults(fn=cmd_serve_manifest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (OrchError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
