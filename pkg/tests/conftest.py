import numpy as np
import pytest

from quditgates.gates import build_corpus, haar_random
from quditgates.primitivity import is_primitive

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(num, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    num, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _ACCEPTANCE[num] = (title, rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {num}: {title}")


@pytest.fixture(scope="session")
def corpus():
    return build_corpus(200, seed=0)


@pytest.fixture(scope="session")
def corpus_verdicts(corpus):
    return [is_primitive(e.gate) for e in corpus]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_local(d, rng):
    return np.kron(haar_random(d, rng), haar_random(d, rng))
