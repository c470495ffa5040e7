"""Recover a tour of the base graph from any feasible schedule.

Pipeline: take the cheapest team's walk over the venues, shortcut it to a
tour of the venue graph, drop the hub and join its neighbours, route every
cross-copy edge through the central vertex, split the resulting walk into
one closed walk per copy, shortcut each, and keep the cheapest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import ClosedWalk, Tour, format_true, make_tour, shortcut_walk, walk_cost
from .ttp import Schedule, TtpInstance, _require_structure, evaluate_cost, team_walk
from .wheel import ALL_COPIES, copy_of

# the longest wheel edge is 4 true units
_MAX_WHEEL_EDGE = 8


def cheapest_team(inst: TtpInstance, s: Schedule, per_team: np.ndarray | None = None) -> tuple[int, int]:
    """(team, cost) of the minimum-cost team; ties go to the lowest index."""
    if per_team is None:
        per_team = evaluate_cost(inst, s).per_team
    team = int(np.argmin(per_team))
    return team, int(per_team[team])


@dataclass
class Extraction:
    tour: Tour
    K: int
    M: int
    team: int
    total: int
    team_count: int
    hub_weight: int
    c: int
    venue_tour_cost: int
    wheel_tour: Tour
    routed_walk: ClosedWalk
    copy_costs: dict[int, int]

    @property
    def walk_lower_bound(self) -> int:
        """2w_u + cK - 4, in half-units."""
        return 2 * self.hub_weight + self.c * self.K - _MAX_WHEEL_EDGE

    @property
    def team_bound_holds(self) -> bool:
        return self.M >= self.walk_lower_bound

    @property
    def total_bound_holds(self) -> bool:
        return self.total >= self.team_count * self.walk_lower_bound

    @property
    def holds(self) -> bool:
        return self.team_bound_holds and self.total_bound_holds

    def to_text(self) -> str:
        rows = [
            ("team", self.team),
            ("M_half", self.M),
            ("M_true", format_true(self.M)),
            ("K_half", self.K),
            ("K_true", format_true(self.K)),
            ("c", self.c),
            ("w_u_half", self.hub_weight),
            ("w_u_true", format_true(self.hub_weight)),
            ("total_half", self.total),
            ("teams", self.team_count),
            ("walk_lower_bound_half", self.walk_lower_bound),
            ("total_lower_bound_half", self.team_count * self.walk_lower_bound),
            ("M_ge_bound", "pass" if self.team_bound_holds else "FAIL"),
            ("total_ge_bound", "pass" if self.total_bound_holds else "FAIL"),
            ("tour", " ".join(map(str, self.tour.order))),
        ]
        return "".join(f"{k} = {v}\n" for k, v in rows)


def route_through_center(inst: TtpInstance, wheel_tour: Tour) -> ClosedWalk:
    """Replace every edge joining two different copies by a detour via vertex 0."""
    wheel = inst.wheel
    order = wheel_tour.rotated_to(0).order
    seq = [0]
    for x, y in zip(order, order[1:] + (0,)):
        cx, cy = copy_of(wheel, x)[0], copy_of(wheel, y)[0]
        if ALL_COPIES not in (cx, cy) and cx != cy:
            seq.append(0)
        seq.append(y)
    # adjacent repeats of vertex 0 cost nothing; merge them
    merged = [seq[0]] + [b for a, b in zip(seq, seq[1:]) if not (a == b == 0)]
    return ClosedWalk(tuple(merged), walk_cost(wheel.matrix, merged))


def split_by_copy(inst: TtpInstance, walk: ClosedWalk) -> dict[int, list[int]]:
    """Per copy, the closed walk (in base labels) through the central vertex."""
    wheel = inst.wheel
    pieces: dict[int, list[int]] = {i: [wheel.central] for i in range(1, wheel.c + 1)}
    segment: list[int] = []
    for x in walk.sequence[1:]:
        if x != 0:
            segment.append(x)
            continue
        if segment:
            copies = {copy_of(wheel, y)[0] for y in segment}
            assert len(copies) == 1, "segment between centre visits spans several copies"
            cp = copies.pop()
            pieces[cp] += [copy_of(wheel, y)[1] for y in segment] + [wheel.central]
            segment = []
    assert not segment
    return pieces


def extract_tour(
    inst: TtpInstance, s: Schedule, per_team: np.ndarray | None = None, validate: bool = True
) -> Extraction:
    if validate:
        _require_structure(inst, s)
    if per_team is None:
        per_team = evaluate_cost(inst, s, validate=False).per_team
    wheel = inst.wheel
    hub = inst.hub
    venues = inst.venue_matrix

    team, M = cheapest_team(inst, s, per_team)
    walk = team_walk(inst, s, team)
    assert walk.cost == M
    missing = set(range(hub + 1)) - set(walk.sequence)
    if missing:
        raise ValueError(f"cheapest team's walk misses venues {sorted(missing)}")

    venue_tour = shortcut_walk(venues, walk)
    assert venue_tour.cost <= M

    order = venue_tour.rotated_to(hub).order[1:]
    wheel_tour = make_tour(wheel.matrix, order)
    assert wheel_tour.cost <= M - 2 * inst.hub_weight + _MAX_WHEEL_EDGE

    routed = route_through_center(inst, wheel_tour)
    assert routed.cost == wheel_tour.cost

    pieces = split_by_copy(inst, routed)
    tours = {cp: shortcut_walk(wheel.base.matrix, seq) for cp, seq in pieces.items()}
    copy_costs = {cp: t.cost for cp, t in tours.items()}
    assert sum(walk_cost(wheel.base.matrix, seq) for seq in pieces.values()) == routed.cost
    best = min(tours, key=lambda cp: (copy_costs[cp], cp))
    K = copy_costs[best]
    assert wheel.c * K <= routed.cost

    return Extraction(
        tour=tours[best],
        K=K,
        M=M,
        team=team,
        total=int(per_team.sum()),
        team_count=inst.team_count,
        hub_weight=inst.hub_weight,
        c=wheel.c,
        venue_tour_cost=venue_tour.cost,
        wheel_tour=wheel_tour,
        routed_walk=routed,
        copy_costs=copy_costs,
    )
