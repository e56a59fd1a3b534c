import functools

import numpy as np
import pytest

from qsuperopt.gatedef import ParamSpec, builtin_gate_set
from qsuperopt.generator import RepGen
from qsuperopt.pruning import prune


@functools.lru_cache(maxsize=None)
def generated(gate_set: str, n: int, q: int, m: int = 2):
    return RepGen(builtin_gate_set(gate_set), ParamSpec(m), q).run(n)


@functools.lru_cache(maxsize=None)
def pruned(gate_set: str, n: int, q: int, m: int = 2):
    return prune(generated(gate_set, n, q, m))


@pytest.fixture
def nam():
    return builtin_gate_set("nam")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
