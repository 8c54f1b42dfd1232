import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # record call-phase outcome so acceptance tests can emit a pass/fail line
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        item._acceptance_passed = report.passed
