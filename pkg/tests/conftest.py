import pytest

from phi44.norms import build_norm_weights
from phi44.trees import build_fundamental

ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Criterion number -> result line, printed after the run."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, {})


@pytest.fixture(scope="session")
def fundamental_04():
    return build_fundamental(0.04)


@pytest.fixture(scope="session")
def fundamental_02():
    return build_fundamental(0.02)


@pytest.fixture(scope="session")
def weights_04(fundamental_04):
    s = fundamental_04
    return build_norm_weights(0.04, s.q2, s.scales, s.pattern, s.n_max)


@pytest.fixture(scope="session")
def weights_02(fundamental_02):
    s = fundamental_02
    return build_norm_weights(0.02, s.q2, s.scales, s.pattern, s.n_max)


@pytest.fixture(scope="session")
def run_02():
    from phi44.iteration import phi44_iterate

    return phi44_iterate(0.02, nu_max=20, tol=1e-5, n_max=7)


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])
