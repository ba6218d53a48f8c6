import pytest

from henonlab.radial import reference_spec, symmetric_grid

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def ref():
    return reference_spec()


@pytest.fixture(scope="session")
def grid():
    return symmetric_grid(1e4, 1025)


@pytest.fixture(scope="session")
def small_grid():
    return symmetric_grid(1e4, 257)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def kappa_hat(ref, grid):
    from henonlab.threshold import bisect_threshold

    rep = bisect_threshold(ref, grid)
    return 0.5 * (rep.kappa_lo + rep.kappa_hi)
