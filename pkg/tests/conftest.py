import os
from pathlib import Path

import pytest

from cruc import _backend
from cruc.matrix import RatingScale, build_matrix

ROOT = Path(__file__).resolve().parents[1]
FIXTURE_1K = ROOT / "src" / "cruc" / "data" / "fixture_1k.tsv"

F1_TRIPLES = [("a", "x", 4.0), ("a", "y", 2.0), ("b", "x", 5.0), ("b", "z", 1.0), ("c", "y", 3.0)]


def ml100k_path():
    env = os.environ.get("CRUC_ML100K")
    for candidate in (env, ROOT / "data" / "ml-100k" / "u.data"):
        if candidate and Path(candidate).is_file():
            return Path(candidate)
    return None


def ml10m_path():
    env = os.environ.get("CRUC_ML10M")
    for candidate in (env, ROOT / "data" / "ml-10M100K" / "ratings.dat"):
        if candidate and Path(candidate).is_file():
            return Path(candidate)
    return None


@pytest.fixture
def scale5():
    return RatingScale(1.0, 5.0)


@pytest.fixture
def f1(scale5):
    return build_matrix(F1_TRIPLES, scale5)


@pytest.fixture(params=sorted(_backend.implementations()))
def backend(request):
    return _backend.implementations()[request.param]


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" in props and (rep.when == "call" or outcome == "skipped"):
                lines.append((props["criterion"], outcome.upper(), props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for crit, outcome, detail in sorted(lines, key=lambda t: t[0]):
            terminalreporter.write_line(f"{outcome:7s} {crit}  {detail}")
