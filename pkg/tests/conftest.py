import sys

import pytest

from kazhdan import assemble, build_support, certify, make_engine, solve


@pytest.fixture(scope="session")
def sl3():
    return make_engine("SL", 3)


@pytest.fixture(scope="session")
def heis():
    return make_engine("Heisenberg")


@pytest.fixture(scope="session")
def zz():
    return make_engine("Z", 1)


@pytest.fixture(scope="session")
def obs1_certificate(sl3):
    """Accepted class-mode certificate that |alpha(ef)|^2 < 2 on {1, e, f, g, fg}."""
    E = build_support(sl3, elements=["1", "e", "f", "g", "f g"])
    p = assemble(sl3, E, "class", objective={"e f": 1}, target=2)
    return certify(p, solve(p))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
