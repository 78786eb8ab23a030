from pathlib import Path

import pytest

from rtlloop.frontend import parse_source
from rtlloop.pwm import corpus_sources

FIXTURES = Path(__file__).parent / "fixtures"
LISTINGS = FIXTURES / "listings"


@pytest.fixture
def listing():
    def read(name):
        path = LISTINGS / name
        return path.read_text(), str(path)
    return read


@pytest.fixture(scope="session")
def corpus():
    return corpus_sources()


@pytest.fixture(scope="session")
def corpus_asts(corpus):
    return [parse_source(text, name).ast for name, text in corpus.items()]


def parse_ok(text, file="t.v"):
    r = parse_source(text, file)
    assert r.diagnostics == [], [d.as_text() for d in r.diagnostics]
    return r.ast


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
