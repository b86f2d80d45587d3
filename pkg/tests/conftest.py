from importlib import resources

import pytest

from drgkit.clausal import read_clf

DATA = resources.files("drgkit.data")


def fixture_path(name):
    return str(DATA.joinpath(name))


def load(name):
    return read_clf(fixture_path(name))


@pytest.fixture(scope="session")
def fig1e():
    return load("fig1e.clf")[0]


@pytest.fixture(scope="session")
def szp():
    return load("szp.clf")[0]


@pytest.fixture(scope="session")
def corpus():
    """Every well-formed fixture with one concept per referent."""
    return load("corpus.clf") + load("fig1e.clf") + load("szp.clf")


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
