import pytest

from usc_raman import hilbert, rabi


@pytest.fixture(scope="session")
def space20():
    return hilbert.build_space(20)


@pytest.fixture(scope="session")
def space10():
    return hilbert.build_space(10)


@pytest.fixture(scope="session")
def spec05(space20):
    return rabi.rabi_spectrum(rabi.SystemParams(lam=0.5), space20)


@pytest.fixture(scope="session")
def spec06(space20):
    return rabi.rabi_spectrum(rabi.SystemParams(lam=0.6), space20)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one verdict line per acceptance criterion for the terminal summary."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
