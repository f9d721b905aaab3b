import pytest

from soergel_bases.catbases import Workspace
from soergel_bases.coxeter import build_system, dihedral

RANK3 = {"generators": ["s", "r", "t"], "bond": [[1, 4, 4], [4, 1, 4], [4, 4, 1]]}


@pytest.fixture(scope="session")
def ws4():
    return Workspace(dihedral(4))


@pytest.fixture(scope="session")
def ws5():
    return Workspace(dihedral(5))


@pytest.fixture(scope="session")
def ws_rank3():
    return Workspace(build_system(RANK3["bond"], names=RANK3["generators"]))


@pytest.fixture(scope="session", params=[4, 5])
def ws_dihedral(request, ws4, ws5):
    return ws4 if request.param == 4 else ws5


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.__dict__.setdefault("_acceptance", {})


def pytest_terminal_summary(terminalreporter, config):
    log = getattr(config, "_acceptance", None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(log):
        terminalreporter.write_line(log[n])
