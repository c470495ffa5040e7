import numpy as np
import pytest

from uttp_reduction.builder import build_full_schedule
from uttp_reduction.extraction import cheapest_team, extract_tour, route_through_center, split_by_copy
from uttp_reduction.lreduction import forward_map, hub_weight_half
from uttp_reduction.metric import make_tour, solve_tsp_exact, tour_cost
from uttp_reduction.ttp import InfeasibleSchedule, Schedule, build_ttp_instance, evaluate_cost, team_walk
from uttp_reduction.wheel import build_wheel, lift_tour

from conftest import Built


def certificate_holds(ext):
    bound = 2 * ext.hub_weight + ext.c * ext.K - 8
    return ext.M >= bound and ext.total >= ext.team_count * bound


def scrambled(schedule, seed):
    """Same games, random team relabeling and day order: still a valid tournament."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(schedule.team_count)
    arr = perm[schedule.games].reshape(schedule.day_count, -1, 2)
    return Schedule.from_array(schedule.team_count, arr[rng.permutation(schedule.day_count)])


@pytest.fixture(scope="module")
def tri_run(triangle_base):
    # n = 3, c = 2: m = 5, 300 teams
    return Built(triangle_base, 2)


def test_optimal_schedule_recovers_optimum(small_run):
    ext = extract_tour(small_run.inst, small_run.schedule)
    assert ext.K == small_run.base_opt.cost
    assert ext.holds
    assert tour_cost(small_run.base.matrix, ext.tour.order) == ext.K


def test_cheapest_team_matches_exhaustive_scan(tri_run):
    inst, s = tri_run.inst, tri_run.schedule
    walks = [team_walk(inst, s, t).cost for t in range(inst.team_count)]
    team, cost = cheapest_team(inst, s)
    assert cost == min(walks)
    assert team == walks.index(min(walks))
    ext = extract_tour(inst, s)
    assert ext.total == sum(walks)
    assert ext.total >= inst.team_count * ext.M


def test_tie_goes_to_lowest_index(tri_run):
    per_team = np.full(tri_run.inst.team_count, 50)
    per_team[[7, 3, 200]] = 10
    assert cheapest_team(tri_run.inst, tri_run.schedule, per_team) == (3, 10)


@pytest.mark.parametrize("seed", range(6))
def test_certificate_on_scrambled_schedules(tri_run, seed):
    s = scrambled(tri_run.schedule, seed)
    ext = extract_tour(tri_run.inst, s)
    assert certificate_holds(ext)
    assert ext.K >= tri_run.base_opt.cost


@pytest.mark.parametrize("seed", range(4))
def test_certificate_on_random_wheel_tours(tri_run, seed):
    wheel = tri_run.inst.wheel
    order = np.random.default_rng(seed).permutation(wheel.m)
    s = build_full_schedule(tri_run.inst, make_tour(wheel.matrix, order))
    ext = extract_tour(tri_run.inst, s)
    assert certificate_holds(ext)


def test_step_invariants(tri_run):
    s = scrambled(tri_run.schedule, 99)
    ext = extract_tour(tri_run.inst, s)
    assert ext.venue_tour_cost <= ext.M
    assert ext.routed_walk.cost == ext.wheel_tour.cost
    assert ext.wheel_tour.cost <= ext.M - 2 * ext.hub_weight + 8
    assert ext.c * ext.K <= ext.routed_walk.cost
    assert set(ext.copy_costs) == {1, 2}
    assert sorted(ext.tour.order) == [0, 1, 2]


def test_degenerate_single_copy(triangle_base):
    wheel = build_wheel(triangle_base, 0, 1)
    m = wheel.m
    inst = build_ttp_instance(wheel, hub_weight_half(3, 1), 10 * m * (m + 1))
    opt = solve_tsp_exact(triangle_base.matrix)
    s = build_full_schedule(inst, lift_tour(wheel, opt))
    ext = extract_tour(inst, s)
    assert ext.K == opt.cost
    assert ext.routed_walk.cost == ext.wheel_tour.cost
    assert ext.holds


def test_route_through_center(triangle_base):
    inst, _ = forward_map(triangle_base, 4, allow_small_c=True)
    wheel = inst.wheel  # copies: (1, 2), (3, 4), (5, 6), (7, 8)
    tour = make_tour(wheel.matrix, [0, 1, 3, 2, 4, 5, 6, 7, 8])
    walk = route_through_center(inst, tour)
    assert walk.sequence == (0, 1, 0, 3, 0, 2, 0, 4, 0, 5, 6, 0, 7, 8, 0)
    assert walk.cost == tour.cost
    pieces = split_by_copy(inst, walk)
    assert pieces == {1: [0, 1, 0, 2, 0], 2: [0, 1, 0, 2, 0], 3: [0, 1, 2, 0], 4: [0, 1, 2, 0]}


def test_rejects_infeasible(tri_run):
    arr = tri_run.schedule.games.reshape(tri_run.schedule.day_count, -1, 2)[:-1]
    with pytest.raises(InfeasibleSchedule):
        extract_tour(tri_run.inst, Schedule.from_array(tri_run.inst.team_count, arr))


def test_report_text(small_run):
    text = extract_tour(small_run.inst, small_run.schedule).to_text()
    assert "M_ge_bound = pass" in text
    assert "total_ge_bound = pass" in text


def test_per_team_override_is_used(tri_run):
    per_team = evaluate_cost(tri_run.inst, tri_run.schedule).per_team
    a = extract_tour(tri_run.inst, tri_run.schedule, per_team)
    b = extract_tour(tri_run.inst, tri_run.schedule)
    assert (a.team, a.K, a.total) == (b.team, b.K, b.total)
