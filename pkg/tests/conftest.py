import pytest

from enfcheck import kernels
from enfcheck.catalog import bundled_document

ACCEPTANCE: list[tuple[str, bool, str]] = []


def record(criterion: str, passed: bool, detail: str = "") -> None:
    """Log one acceptance line; the summary hook prints them after the run."""
    ACCEPTANCE.append((criterion, passed, detail))
    print(f"{'PASS' if passed else 'FAIL'} {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {criterion}: {detail}")


@pytest.fixture(params=kernels.available())
def backend(request):
    with kernels.using(request.param):
        yield request.param


@pytest.fixture(scope="session")
def mp_doc():
    return bundled_document("mediaplayer.enf")


@pytest.fixture(scope="session")
def ea_p1(mp_doc):
    return mp_doc.edit_automata["EA_p1"]


@pytest.fixture(scope="session")
def ea_p2(mp_doc):
    return mp_doc.edit_automata["EA_p2"]
