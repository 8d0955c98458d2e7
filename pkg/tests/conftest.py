import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from smoothorbit.moebius import InvalidMap, MoebiusMap, OrbitSpec  # noqa: E402

SMALL_PRIMES = [q for q in range(5, 400) if all(q % d for d in range(2, int(q**0.5) + 1))]


def random_map(rng, p, allow_parabolic=True):
    from smoothorbit.moebius import SpectralKind, classify
    while True:
        try:
            m = MoebiusMap(p, *(rng.randrange(p) for _ in range(4)))
        except InvalidMap:
            continue
        if allow_parabolic or classify(m).kind is not SpectralKind.PARABOLIC:
            return m


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture(scope="session")
def sieve_1e5():
    from smoothorbit.smooth import build_sieve
    return build_sieve(10**5)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
