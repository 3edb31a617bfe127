"""Shared pytest config: per-criterion result lines for the acceptance suite."""

from __future__ import annotations

import pytest

# (label, runtime budget) in the order the summary should print
CRITERIA = [
    ("worked-example-exactness", "< 1 s"),
    ("scenario-outcomes", "< 5 s"),
    ("tier3-override-dominance", "< 10 s"),
    ("gamma-properties", "< 10 s"),
    ("scope-creep-oracle", "< 30 s"),
    ("p-flag-enforcement", "< 1 s"),
    ("withdrawal-propagation", "< 10 s"),
    ("determinism-replay", "< 5 s"),
    ("decision-latency-budget", "< 30 s"),
]


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(label): marks a test as one acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker:
        report.acceptance_label = marker.args[0]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results: dict[str, tuple[str, float]] = {}
    for reports in terminalreporter.stats.values():
        for report in reports:
            label = getattr(report, "acceptance_label", None)
            if label is None:
                continue
            duration = getattr(report, "duration", 0.0)
            if report.failed:
                results[label] = ("FAIL", duration)
            elif report.skipped:
                results.setdefault(label, ("SKIP", duration))
            elif report.when == "call" and label not in results:
                results[label] = ("PASS", duration)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label, budget in CRITERIA:
        if label not in results:
            continue
        verdict, duration = results[label]
        terminalreporter.write_line(
            f"{verdict}  {label}  ({duration:.2f}s, budget {budget})"
        )
