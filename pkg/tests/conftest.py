import numpy as np
import pytest

from geodesia import shapes


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def tetra():
    return shapes.tetrahedron()


@pytest.fixture(scope="session")
def cube():
    return shapes.cube()


@pytest.fixture(scope="session")
def octa():
    return shapes.octahedron()


@pytest.fixture(scope="session")
def hull8():
    return shapes.random_hull(8, seed=3)


@pytest.fixture(scope="session")
def gtetra():
    return shapes.generic_tetrahedron()


@pytest.fixture(scope="session")
def gocta():
    return shapes.generic_octahedron()


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record the one-line verdict of an acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
