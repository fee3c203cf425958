"""Shared fixtures plus a per-criterion PASS/FAIL summary for acceptance tests."""

from __future__ import annotations

import numpy as np
import pytest

from knowflow.domains import DomainTable, Domain, Operand, Operation
from knowflow.scoring import NetworkSnapshot

_CRITERIA: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion a test belongs to")


def pytest_runtest_logreport(report):
    name = report.user_properties and dict(report.user_properties).get("criterion")
    if not name:
        return
    outcomes = _CRITERIA.setdefault(name, [])
    if report.when == "call" or report.outcome == "failed":
        outcomes.append(report.outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcomes in _CRITERIA.items():
        status = "PASS" if outcomes and all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  ({outcomes.count('passed')}/{len(outcomes)} checks)")


def make_table(n: int) -> DomainTable:
    ops = list(Operand)
    acts = list(Operation)
    return DomainTable(tuple(
        Domain(f"D{i:02d}", f"domain {i}", ops[i % len(ops)], acts[i % len(acts)]) for i in range(n)
    ))


def snapshot_from(w, period="T1") -> NetworkSnapshot:
    w = np.asarray(w, dtype=float)
    return NetworkSnapshot(make_table(w.shape[0]), period, w)


def random_weights(rng: np.random.Generator, n: int, density: float = 0.5) -> np.ndarray:
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                w[i, j] = w[j, i] = rng.uniform(0.05, 6.0)
    return w


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)
