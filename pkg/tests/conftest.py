from collections import defaultdict

import numpy as np
import pytest

CRITERIA = {
    1: "scalar closed-form suite",
    2: "oracle equivalence on randomized problems",
    3: "round-trip forgetting",
    4: "bias split",
    5: "damped-sine ODE reproduction",
    6: "damped-sine ODE least-squares baseline",
    7: "reduced Poisson reproduction",
    8: "continual-memory trap",
    9: "run determinism",
}

_outcomes = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes[marker.args[0]].append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        runs = _outcomes.get(k)
        if not runs:
            terminalreporter.write_line(f"criterion {k}: NOT RUN  {CRITERIA[k]}")
            continue
        ok = all(p for _, p in runs)
        failed = [name for name, p in runs if not p]
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {CRITERIA[k]} ({len(runs) - len(failed)}/{len(runs)} checks)"
        if failed:
            line += "  failing: " + ", ".join(failed)
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
