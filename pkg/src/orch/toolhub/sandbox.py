"""Path confinement and bounded execution for builtin tools.

Desk-scale realization of the isolation contract: path confinement plus
wall-clock timeouts instead of a container runtime. The policy type keeps
heavier backends pluggable.
"""

from __future__ import annotations

import threading
import time
from pathlib import Path
from typing import Callable

from ..errors import SandboxViolation
from .types import SandboxPolicy, ToolResult

TRUNCATION_MARKER = "[truncated]"


def resolve_path(raw: str, policy: SandboxPolicy) -> Path:
    """Resolve a user-supplied path inside the policy's allowed roots.

    Relative paths anchor at the first allowed root. Symlinks are followed
    before the containment check, so a link pointing outside is rejected.
    """
    if not policy.allowed_roots:
        raise SandboxViolation("no allowed roots configured")
    candidate = Path(raw)
    if not candidate.is_absolute():
        candidate = Path(policy.allowed_roots[0]) / candidate
    resolved = candidate.resolve()
    for root in policy.allowed_roots:
        root_resolved = Path(root).resolve()
        if resolved == root_resolved or root_resolved in resolved.parents:
            return resolved
    raise SandboxViolation(f"path escapes allowed roots: {raw}")


def truncate_payload(payload: str, policy: SandboxPolicy) -> tuple[str, bool]:
    raw = payload.encode("utf-8")
    if len(raw) <= policy.max_output_bytes:
        return payload, False
    cut = raw[: policy.max_output_bytes].decode("utf-8", errors="ignore")
    return cut + TRUNCATION_MARKER, True


def run_confined(fn: Callable[[], str], policy: SandboxPolicy) -> ToolResult:
    """Run a tool handler under the policy's timeout and output cap.

    The handler runs on a daemon thread; on timeout the thread is abandoned
    (it cannot be killed) and the caller gets status "timeout".
    """
    box: dict = {}

    def target():
        try:
            box["payload"] = fn()
        except SandboxViolation as exc:
            box["violation"] = exc
        except Exception as exc:  # handler bugs become error results
            box["error"] = exc

    worker = threading.Thread(target=target, daemon=True)
    start = time.monotonic()
    worker.start()
    worker.join(policy.timeout_ms / 1000.0)
    elapsed_ms = int((time.monotonic() - start) * 1000)
    if worker.is_alive():
        return ToolResult(status="timeout", payload="", elapsed_ms=elapsed_ms)
    if "violation" in box:
        raise box["violation"]
    if "error" in box:
        payload, truncated = truncate_payload(str(box["error"]), policy)
        return ToolResult(status="error", payload=payload, truncated=truncated, elapsed_ms=elapsed_ms)
    payload, truncated = truncate_payload(box.get("payload", ""), policy)
    return ToolResult(status="ok", payload=payload, truncated=truncated, elapsed_ms=elapsed_ms)
