from pathlib import Path

import numpy as np
import pytest

from safeoc.model import OptionParameters

FIXTURES = Path(__file__).parent / "fixtures"


def random_params(rng: np.random.Generator, features=3, options=2, actions=3, temperature=1.0, scale=1.0):
    return OptionParameters(
        rng.normal(scale=scale, size=(features, options, actions)),
        rng.normal(scale=scale, size=(features, options)),
        rng.normal(scale=scale, size=(features, options, actions)),
        temperature,
    )


@pytest.fixture
def np_rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


# -- acceptance bookkeeping --------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}
INVARIANT_OUTCOMES: dict[str, str] = {}
INVARIANT_IDS: set[str] = set()


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (ok, detail)


def pytest_collection_modifyitems(config, items):
    # acceptance runs last so it can read the invariant outcomes of this session
    items.sort(key=lambda item: item.path.name == "test_acceptance.py")
    INVARIANT_IDS.update(item.nodeid for item in items if item.get_closest_marker("invariant"))


def pytest_runtest_logreport(report):
    if report.nodeid not in INVARIANT_IDS:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        INVARIANT_OUTCOMES[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
