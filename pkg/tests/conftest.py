import pytest

from uttp_reduction.builder import build_full_schedule
from uttp_reduction.lreduction import forward_map
from uttp_reduction.metric import TspInstance, gen_12_instance, solve_tsp_exact
from uttp_reduction.wheel import lift_tour

# true costs v1v2 = 1, v1v3 = 2, v2v3 = 2
TRIANGLE_BASE = [[0, 1, 2], [1, 0, 2], [2, 2, 0]]

# rows/cols v, x2, x3, y2, y3, z2, z3 in true units
TRIANGLE_WHEEL_D = [
    [0, 1, 2, 1, 2, 1, 2],
    [1, 0, 2, 2, 3, 2, 3],
    [2, 2, 0, 3, 4, 3, 4],
    [1, 2, 3, 0, 2, 2, 3],
    [2, 3, 4, 2, 0, 3, 4],
    [1, 2, 3, 2, 3, 0, 2],
    [2, 3, 4, 3, 4, 2, 0],
]

_criteria = {}


@pytest.fixture(scope="session")
def triangle_base():
    return TspInstance.from_true(TRIANGLE_BASE)


class Built:
    def __init__(self, base, c, tour=None):
        self.base = base
        self.inst, self.boosted = forward_map(base, c, allow_small_c=True)
        self.base_opt = solve_tsp_exact(base.matrix)
        self.tour = tour if tour is not None else lift_tour(self.inst.wheel, self.base_opt)
        self.schedule = build_full_schedule(self.inst, self.tour)


@pytest.fixture(scope="session")
def small_run():
    """n = 4, c = 2 full-size run from the optimal tour (560 teams)."""
    return Built(gen_12_instance(4, 0.5, 7), 2)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = rep.failed or (rep.when == "call" and rep.outcome != "passed")
    prev = _criteria.get(number, (title, True))
    if rep.when == "call" or rep.failed:
        _criteria[number] = (title, prev[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
