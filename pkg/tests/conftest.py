from __future__ import annotations

import random

import pytest

from scenepaths.catalog import Asset, Catalog, ingest
from scenepaths.config import DATA_DIR, load_settings
from scenepaths.oracle import RuleOracle, load_rulebook

SCENES = ("bedroom", "living room", "kitchen", "bathroom")


@pytest.fixture(scope="session")
def settings():
    return load_settings()


@pytest.fixture(scope="session")
def catalog():
    return ingest(DATA_DIR / "catalog.txt")


@pytest.fixture(scope="session")
def rulebook():
    return load_rulebook(DATA_DIR / "rulebook.yaml")


@pytest.fixture
def oracle(rulebook):
    return RuleOracle(rulebook, seed=0)


def random_catalog(rng: random.Random, vocabulary, n: int | None = None) -> Catalog:
    """Synthetic catalog drawing tags from the rulebook vocabulary."""
    n = n if n is not None else rng.randint(1, 100)
    vocab = sorted(vocabulary)
    assets = []
    for i in range(n):
        tags = frozenset(rng.sample(vocab, rng.randint(1, 3)) + rng.sample(list(SCENES), rng.randint(0, 1)))
        hint = rng.choice([None] * 8 + ["main", "paired", "other"])
        dims = (round(rng.uniform(0.2, 1.8), 2), round(rng.uniform(0.2, 1.6), 2), round(rng.uniform(0.1, 1.5), 2))
        assets.append(Asset(f"a{i:03d}", " ".join(sorted(tags)[:2]), tags, dims, None, hint))
    return Catalog(tuple(assets))


# -- acceptance reporting -----------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    n, title = marker
    if report.when == "call" or report.outcome == "failed":
        prev = _CRITERIA.get(n, (title, "PASS"))[1]
        outcome = "FAIL" if report.outcome == "failed" or prev == "FAIL" else "PASS"
        _CRITERIA[n] = (title, outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = tuple(m.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, outcome = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {outcome}  {title}")
