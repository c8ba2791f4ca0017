import numpy as np
import pytest

from nlch.grid import make_domain
from nlch.kernel import KernelSpec
from nlch.model import Model
from nlch.operators import EllipticOps


@pytest.fixture(scope="session")
def full_domain():
    return make_domain(0.04, 12.0, 512)


@pytest.fixture(scope="session")
def full_model(full_domain):
    return Model(full_domain, KernelSpec())


@pytest.fixture(scope="session")
def small_domain():
    return make_domain(0.04, 6.0, 64)


@pytest.fixture(scope="session")
def small_model(small_domain):
    return Model(small_domain, KernelSpec())


@pytest.fixture(scope="session")
def small_ops(small_domain):
    return EllipticOps(small_domain)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_LINES] = []


@pytest.fixture
def acceptance_log(request):
    """Append ``PASS``/``FAIL`` lines that are repeated in the terminal summary."""
    lines = request.config.stash[_ACCEPTANCE_LINES]

    def log(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
