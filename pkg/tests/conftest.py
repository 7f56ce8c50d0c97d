import numpy as np
import pytest

from moranforest.rng import make_rng


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20240611)


def tv_counts(a: dict, b: dict) -> float:
    """Total variation between two empirical count tables."""
    na, nb = sum(a.values()), sum(b.values())
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0) / na - b.get(k, 0) / nb) for k in keys)


def rows_as_counts(parents: np.ndarray) -> dict:
    keys, counts = np.unique(parents, axis=0, return_counts=True)
    return {tuple(k.tolist()): int(c) for k, c in zip(keys, counts)}


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
