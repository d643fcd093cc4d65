import numpy as np
import pytest
from hypothesis import settings

from cluster_posterior.combinatorics import build_tables
from cluster_posterior.likelihood import BINARY, CONTINUOUS, BetaBinomial, Dataset, GammaNormal
from cluster_posterior.priors import PriorSpec
from cluster_posterior.subsets import SubsetTable

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

PRIORS = [
    PriorSpec("uniform-k"),
    PriorSpec("uniform-partitions"),
    PriorSpec("dp", theta=1.0),
]
PRIOR_IDS = ["uniform-k", "uniform-partitions", "dp"]


def random_table(n, seed, nonempty_only=True):
    """Seeded table whose linear-domain values are uniform(0, 1)."""
    rng = np.random.default_rng(seed)
    lin = rng.uniform(0.0, 1.0, size=1 << n)
    if nonempty_only:
        lin[0] = 0.0
    return SubsetTable.from_linear(lin)


def random_dataset(n, D, kind, seed):
    rng = np.random.default_rng(seed)
    if kind == BINARY:
        return Dataset(rng.integers(0, 2, size=(n, D)), BINARY)
    centers = rng.normal(0.0, 2.0, size=(3, D))
    labels = rng.integers(0, 3, size=n)
    return Dataset(centers[labels] + rng.normal(size=(n, D)), CONTINUOUS)


def model_for(kind):
    return BetaBinomial() if kind == BINARY else GammaNormal()


def assert_well_formed(result, tol=1e-9):
    """Structural invariants every engine output must satisfy."""
    post = result.summary.posterior_k
    assert (post >= 0).all()
    assert abs(post.sum() - 1.0) <= tol
    if result.cooccurrence is not None:
        c = result.cooccurrence.entries
        assert np.array_equal(c, c.T)
        assert np.array_equal(np.diag(c), np.ones(c.shape[0]))
        assert c.min() >= -tol and c.max() <= 1 + tol


@pytest.fixture(scope="session")
def tables():
    return build_tables(30)


# Acceptance reporting: tests marked criterion(...) get one summary line each.

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    if call.excinfo is None:
        status = "PASS"
    elif call.excinfo.errisinstance(pytest.skip.Exception):
        status = "SKIP"
    else:
        status = "FAIL"
    # a criterion fails if any of its tests fail; opt-in skips do not mask a pass
    rank = {"SKIP": 0, "PASS": 1, "FAIL": 2}
    prev = _CRITERIA.get(number, (title, "SKIP"))[1]
    _CRITERIA[number] = (title, max(prev, status, key=rank.get))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
