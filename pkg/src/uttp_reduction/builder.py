"""Two-phase schedule construction from a tour of the wheel.

Phase 1 runs a mirrored double round robin inside every group.  Phase 2
treats groups as dummy teams: a single round robin in which group 1 visits
groups 2, 3, ... in order, each dummy game expanded into ``group_size``
days by the rotation rule, then the same again with home and away swapped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import Tour
from .ttp import Schedule, TtpInstance, team_dtype


def single_round_robin(k: int, fixed_home: str = "alternate") -> np.ndarray:
    """Circle method; returns ``(k-1, k/2, 2)`` array of (home, away) pairs.

    Team 0 is fixed and meets team ``r + 1`` in round ``r``.  The others sit
    on a circle at positions ``0..k-2``; in round ``r`` the teams at positions
    ``r + i`` and ``r - i`` meet, and the one at ``r + i`` hosts.  The fixed
    team hosts in even rounds (``fixed_home='alternate'``), always
    (``'home'``) or never (``'away'``).
    """
    if k < 2 or k % 2:
        raise ValueError(f"single round robin needs an even team count >= 2, got {k}")
    if fixed_home not in ("alternate", "home", "away"):
        raise ValueError(f"unknown fixed_home mode {fixed_home!r}")
    q = k - 1
    rounds = np.empty((q, k // 2, 2), dtype=np.int64)
    for r in range(q):
        hosts = fixed_home == "home" or (fixed_home == "alternate" and r % 2 == 0)
        rounds[r, 0] = (0, r + 1) if hosts else (r + 1, 0)
        for i in range(1, k // 2):
            rounds[r, i] = ((r + i) % q + 1, (r - i) % q + 1)
    return rounds


def mirrored_double_round_robin(k: int) -> np.ndarray:
    first = single_round_robin(k)
    return np.concatenate([first, first[:, :, ::-1]])


@dataclass(frozen=True, eq=False)
class GroupLayout:
    """``teams[i, k]`` is the team labelled t_{i+1,k+1}."""

    teams: np.ndarray

    def __post_init__(self):
        teams = np.asarray(self.teams, dtype=np.int64)
        if teams.ndim != 2:
            raise ValueError("group table must be two-dimensional")
        if teams.shape[1] % 2:
            raise ValueError(f"group size must be even, got {teams.shape[1]}")
        if teams.shape[0] > 1 and teams.shape[0] % 2:
            raise ValueError(f"group count must be even (or 1), got {teams.shape[0]}")
        if sorted(teams.ravel().tolist()) != list(range(teams.size)):
            raise ValueError("group table must list every team exactly once")
        teams.setflags(write=False)
        object.__setattr__(self, "teams", teams)

    @property
    def group_count(self) -> int:
        return self.teams.shape[0]

    @property
    def group_size(self) -> int:
        return self.teams.shape[1]

    @property
    def team_count(self) -> int:
        return self.teams.size

    def assignment(self) -> dict[int, tuple[int, int]]:
        """team -> (group i, position k), both 1-based."""
        return {
            int(t): (i + 1, k + 1)
            for (i, k), t in np.ndenumerate(self.teams)
        }

    @classmethod
    def simple(cls, group_count: int, group_size: int) -> "GroupLayout":
        return cls(np.arange(group_count * group_size).reshape(group_count, group_size))

    @classmethod
    def for_instance(cls, inst: TtpInstance, tour: Tour) -> "GroupLayout":
        """Group 1 holds the wheel teams in tour order; the hub teams fill the rest.

        The tour is rotated to start at the central vertex so its two teams
        come first and the edge between them (cost 0) closes the cycle.
        """
        m = inst.m
        s = m + 1
        if sorted(tour.order) != list(range(m)):
            raise ValueError("tour is not Hamiltonian on the wheel")
        N = inst.team_count
        if N % s:
            raise ValueError(f"team count {N} is not a multiple of the group size {s}")
        order = tour.rotated_to(0).order
        g1 = [0, 1] + [inst.team_at(x) for x in order[1:]]
        rest = np.arange(s, N).reshape(-1, s)
        return cls(np.vstack([np.array(g1)[None, :], rest]))


def build_phase1(layout: GroupLayout) -> np.ndarray:
    """``(2(s-1), N/2, 2)``: day d of every group's mirrored DRR merged into day d."""
    drr = mirrored_double_round_robin(layout.group_size)
    games = layout.teams[:, drr]  # (groups, days, s/2, 2)
    games = games.transpose(1, 0, 2, 3)
    return games.reshape(games.shape[0], -1, 2)


def dummy_tournament(group_count: int) -> np.ndarray:
    """Single round robin of groups with group 0 away against 1, 2, ... in order."""
    return single_round_robin(group_count, fixed_home="away")


def expand_dummy_game(layout: GroupLayout, home_group: int, away_group: int) -> np.ndarray:
    """``(s, s, 2)``: the ``s`` days induced by one dummy game.

    With ``i`` the larger group index and ``j`` the smaller, on offset day
    ``o`` team t_{i,k} meets t_{j,k+o} (positions mod s).  Hosts are the
    members of ``home_group``.
    """
    s = layout.group_size
    i, j = max(home_group, away_group), min(home_group, away_group)
    k = np.arange(s)
    offsets = (k[None, :] + k[:, None]) % s  # [o, k] -> partner position
    ti = np.broadcast_to(layout.teams[i][None, :], (s, s))
    tj = layout.teams[j][offsets]
    if home_group == i:
        return np.stack([ti, tj], axis=-1)
    return np.stack([tj, ti], axis=-1)


def build_phase2(layout: GroupLayout, out: np.ndarray | None = None) -> np.ndarray:
    """``(2(G-1)s, N/2, 2)``: stage 1 then stage 2 with home and away reversed."""
    G, s = layout.group_count, layout.group_size
    days = 2 * (G - 1) * s
    if out is None:
        out = np.empty((days, layout.team_count // 2, 2), dtype=np.int64)
    if G == 1:
        return out
    dummy = dummy_tournament(G)
    half = days // 2
    # day r*s + o, game slot p*s + k
    stage1 = out[:half].reshape(G - 1, s, G // 2, s, 2)
    for r in range(G - 1):
        for p, (hg, ag) in enumerate(dummy[r]):
            stage1[r, :, p] = expand_dummy_game(layout, int(hg), int(ag))
    out[half:] = out[:half, :, ::-1]
    return out


def build_full_schedule(inst: TtpInstance, tour: Tour) -> Schedule:
    """Phase 1 followed by Phase 2, with segments ``phase1``, ``stage1``, ``stage2``."""
    layout = GroupLayout.for_instance(inst, tour)
    G, s = layout.group_count, layout.group_size
    d1 = 2 * (s - 1)
    d2 = (G - 1) * s
    arr = np.empty((d1 + 2 * d2, inst.team_count // 2, 2), dtype=team_dtype(inst.team_count))
    arr[:d1] = build_phase1(layout)
    build_phase2(layout, out=arr[d1:])
    segments = (("phase1", 0, d1), ("stage1", d1, d1 + d2), ("stage2", d1 + d2, d1 + 2 * d2))
    return Schedule.from_array(inst.team_count, arr, segments=segments, groups=layout)
