"""Shared fixtures plus the acceptance-criteria summary.

Tests marked `criterion(n)` are aggregated into one pass/fail line per
criterion, printed after the normal pytest output.
"""
from __future__ import annotations

from collections import defaultdict

import pytest

from tlpc.corpus import corpus_names, load_corpus

CRITERIA = {
    1: "most general clause types, plain and wrt a variable typing",
    2: "skeleton properness and the most general derivation tree",
    3: "bounded static check fails where runtime monitoring passes",
    4: "append: head condition, proper type skeleton, bounded check",
    5: "semi-genericity checking and partition search",
    6: "fgs program family verdicts and execution",
    7: "randomized property suites",
}

_node_criterion: dict[str, int] = {}
_results: dict[int, dict[str, float | bool]] = defaultdict(
    lambda: {"ok": True, "ran": False, "secs": 0.0})


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(n): part of acceptance criterion n")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _node_criterion[item.nodeid] = mark.args[0]


def pytest_runtest_logreport(report):
    n = _node_criterion.get(report.nodeid)
    if n is None:
        return
    slot = _results[n]
    if report.when == "call":
        slot["ran"] = True
        slot["secs"] += report.duration
    if report.outcome not in ("passed",) and not report.skipped:
        slot["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        slot = _results.get(n)
        if slot is None or not slot["ran"]:
            verdict = "FAIL (not run)"
        elif slot["ok"]:
            verdict = f"PASS ({slot['secs']:.2f}s)"
        else:
            verdict = f"FAIL ({slot['secs']:.2f}s)"
        terminalreporter.write_line(
            f"criterion {n} ({CRITERIA[n]}): {verdict}")


@pytest.fixture(scope="session")
def corpus():
    return {name: load_corpus(name) for name in corpus_names()}


def _program_fixture(name):
    @pytest.fixture(scope="session", name=name)
    def fx(corpus):
        return corpus[name]
    return fx


append = _program_fixture("append")
eqnil = _program_fixture("eqnil")
fgs1 = _program_fixture("fgs1")
fgs2 = _program_fixture("fgs2")
fgs3 = _program_fixture("fgs3")
hqpr = _program_fixture("hqpr")
nest = _program_fixture("nest")
nestcount = _program_fixture("nestcount")
semigen = _program_fixture("semigen")
