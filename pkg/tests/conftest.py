"""Shared fixtures and the per-criterion acceptance summary."""

from __future__ import annotations

from collections import OrderedDict

import numpy as np
import pytest

ACCEPTANCE = {
    1: "pure-state Pinsker equality (200 encodings, 1e-9, <5 s)",
    2: "Uhlmann extraction matches fidelity (100 purifications, 1e-8, <10 s)",
    3: "reflection AND protocol correct for r=1..8 (1e-12, <1 s)",
    4: "CIC sandwich log2(k)/12k <= cic, k*cic/log2(k) <= frozen constant",
    5: "lower-bound audit on AND r=1..8 and 100 random protocols (<30 s)",
    6: "cic = (2/3) cic0 under the hard distribution (1e-9)",
    7: "privacy compiler on send-x AND (<30 s)",
    8: "one-shot compiler on 50 coined protocols (<2 min)",
    9: "entropy lemma on 1000 arrays and concavity grid",
    10: "QOTP twirl is maximally mixed (widths 1-4, 1e-12)",
}

_results: "OrderedDict[int, list[bool]]" = OrderedDict((n, []) for n in ACCEPTANCE)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _results[n].append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not any(_results.values()):
        return
    terminalreporter.section("acceptance criteria")
    for n, desc in ACCEPTANCE.items():
        runs = _results[n]
        status = "NOT RUN" if not runs else ("PASS" if all(runs) else "FAIL")
        terminalreporter.write_line(f"criterion {n:2d}: {status:7s} {desc}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
