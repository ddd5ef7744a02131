import numpy as np
import pytest

from bayes_regress import Example1Hyper, Example2Hyper, Example3Hyper


@pytest.fixture
def ex1():
    return Example1Hyper(1.0)


@pytest.fixture
def ex2():
    return Example2Hyper()


@pytest.fixture
def ex3():
    return Example3Hyper(mu=0.0, tau=1.0, sigma=1.0, rho=0.5)


@pytest.fixture(params=["example1", "example2", "example3"])
def any_hyper(request):
    return {"example1": Example1Hyper(1.0), "example2": Example2Hyper(), "example3": Example3Hyper()}[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: int(k.split()[0][2:])):
        ok, detail = RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
