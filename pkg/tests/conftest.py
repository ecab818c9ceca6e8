import random

import pytest

from matchfix.tournament import Tournament, num_pairs

# criterion number -> (description, list of outcomes)
_CRITERIA: dict[int, tuple[str, list[str]]] = {}
# criterion number -> tests collected, before any -k/-m deselection
_COLLECTED: dict[int, int] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion covered by the test")


def pytest_itemcollected(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        number, text = mark.args
        _CRITERIA.setdefault(number, (text, []))
        _COLLECTED[number] = _COLLECTED.get(number, 0) + 1


def pytest_runtest_logreport(report):
    # count the call phase, or setup when it did not get that far
    if report.when == "call" or (report.when == "setup" and not report.passed):
        for key, value in report.user_properties:
            if key == "criterion":
                _CRITERIA[value][1].append(report.outcome)


@pytest.fixture(autouse=True)
def _tag_criterion(request, record_property):
    mark = request.node.get_closest_marker("criterion")
    if mark is not None:
        record_property("criterion", mark.args[0])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        text, outcomes = _CRITERIA[number]
        if any(o != "passed" for o in outcomes):
            status = "FAIL"
        elif len(outcomes) < _COLLECTED[number]:
            status = f"INCOMPLETE ({len(outcomes)} of {_COLLECTED[number]} tests run)"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {number:2d} {status}: {text}")


def random_tournament(n: int, rng: random.Random) -> Tournament:
    return Tournament(n, rng.getrandbits(num_pairs(n)) if n > 1 else 0)


@pytest.fixture
def rng():
    return random.Random(20240611)
