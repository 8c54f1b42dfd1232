"""Shared builders for scripted end-to-end runs and synthetic trajectories."""

import json
import random

from orch.orchestrator import Step, Trajectory
from orch.toolhub.types import ToolResult, ToolSpec


def hier_step_entries(toolset, tool, arguments, routed=True):
    """Script entries for one hierarchical step (route, select, arguments)."""
    entries = []
    if routed:
        entries.append(("base", toolset))
    entries.append((f"sel:{toolset}", tool))
    entries.append((f"arg:{toolset}:{tool}", json.dumps(arguments)))
    return entries


def hier_finish_entries(toolset, summary="All done.", routed=True):
    entries = []
    if routed:
        entries.append(("base", toolset))
    entries.append((f"sel:{toolset}", "summarize"))
    entries.append(("base", summary))
    return entries


def make_specs(toolset_id="t1", tools=("alpha_tool", "beta_tool", "gamma_tool")):
    return {
        toolset_id: [
            ToolSpec(
                toolset_id=toolset_id,
                name=name,
                description=f"Does the {name} thing.",
                schema={"type": "object", "properties": {"x": {"type": "string"}},
                        "required": ["x"], "additionalProperties": False},
            )
            for name in tools
        ]
    }


def random_arguments(rng, depth=0):
    if depth > 1:
        return rng.choice(["leaf", 7, True])
    keys = rng.sample(["path", "n", "flag", "items", "nested", "note"], rng.randint(1, 4))
    out = {}
    for key in keys:
        pick = rng.random()
        if pick < 0.4:
            out[key] = "".join(rng.choices("abc/._- 0123456789", k=rng.randint(0, 12)))
        elif pick < 0.6:
            out[key] = rng.randint(-100, 100)
        elif pick < 0.75:
            out[key] = [rng.randint(0, 9) for _ in range(rng.randint(0, 3))]
        else:
            out[key] = random_arguments(rng, depth + 1)
    return out


def random_trajectory(rng, specs_by_toolset):
    toolset_id = rng.choice(sorted(specs_by_toolset))
    specs = specs_by_toolset[toolset_id]
    steps = []
    for index in range(rng.randint(1, 6)):
        spec = rng.choice(specs)
        steps.append(Step(
            index=index,
            toolset_id=toolset_id,
            tool=spec.name,
            arguments=random_arguments(rng),
            result=ToolResult(status=rng.choice(["ok", "ok", "error"]),
                              payload=f"result {index}"),
            model_calls=3,
        ))
    terminated = rng.choice(["summarize", "max_steps"])
    return Trajectory(
        query=f"do task {rng.randint(0, 10 ** 6)}",
        steps=steps,
        summary="done" if terminated == "summarize" else "",
        terminated_by=terminated,
        summary_toolset_id=toolset_id if terminated == "summarize" else None,
    )


def make_random_trajectories(n, seed, specs_by_toolset):
    rng = random.Random(seed)
    return [random_trajectory(rng, specs_by_toolset) for _ in range(n)]

def fs_config(sandbox_dir, toolset_id="filesystem", **policy_kwargs):
    from orch.toolhub import SandboxPolicy, ToolsetConfig

    policy = SandboxPolicy(allowed_roots=(str(sandbox_dir),),
                           timeout_ms=policy_kwargs.pop("timeout_ms", 5000),
                           max_output_bytes=policy_kwargs.pop("max_output_bytes", 64_000))
    return ToolsetConfig(toolset_id=toolset_id, transport="builtin",
                         builtin="filesystem", sandbox=policy)


def scripted_gateway(script):
    from orch.gateway import Gateway, ScriptedBackend

    backend = ScriptedBackend(script)
    return Gateway(backend), backend
