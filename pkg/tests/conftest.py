import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(autouse=True, scope="session")
def _oracle_cache(tmp_path_factory):
    # keep oracle files out of the user's home during tests
    path = tmp_path_factory.mktemp("oracle-cache")
    old = os.environ.get("BRUELAB_CACHE_DIR")
    os.environ["BRUELAB_CACHE_DIR"] = str(path)
    yield path
    if old is None:
        os.environ.pop("BRUELAB_CACHE_DIR", None)
    else:
        os.environ["BRUELAB_CACHE_DIR"] = old


# one summary line per acceptance criterion, printed after the run
CRITERIA_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(CRITERIA_LINES):
            terminalreporter.write_line(CRITERIA_LINES[key])
