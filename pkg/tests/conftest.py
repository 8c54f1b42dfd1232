import pytest

from orch.toolhub import SandboxPolicy, ToolRegistry, ToolsetConfig

from helpers import fs_config


@pytest.fixture
def sandbox_dir(tmp_path):
    root = tmp_path / "sandbox"
    root.mkdir()
    (root / "a.txt").write_text("hello sandbox\n")
    (root / "notes.md").write_text("# notes\nremember the milk\n")
    reports = root / "reports"
    reports.mkdir()
    (reports / "2024-Q3.csv").write_text("quarter,revenue\nQ3,1200\n")
    (reports / "big.log").write_text("line\n" * 200)
    return root


@pytest.fixture
def fs_policy(sandbox_dir):
    return SandboxPolicy(allowed_roots=(str(sandbox_dir),), timeout_ms=5000,
                         max_output_bytes=64_000)


@pytest.fixture
def registry_fs(sandbox_dir):
    registry = ToolRegistry()
    registry.register_toolset(fs_config(sandbox_dir))
    yield registry
    registry.close()


@pytest.fixture
def registry_three(sandbox_dir):
    """Three toolsets, 30 tools total: filesystem (12) + notion (9) + monday (9)."""
    registry = ToolRegistry()
    registry.register_toolset(fs_config(sandbox_dir))
    for name in ("notion", "monday"):
        registry.register_toolset(ToolsetConfig(
            toolset_id=name, transport="builtin", builtin=name,
            sandbox=SandboxPolicy(allowed_roots=(), timeout_ms=5000)))
    yield registry
    registry.close()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # record call-phase outcome so acceptance tests can emit a pass/fail line
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        item._acceptance_passed = report.passed
