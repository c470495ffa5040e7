"""TTP instances on the wheel plus a hub venue, schedules, validation and travel cost.

Venues are the wheel vertices ``0..m-1`` followed by the hub ``u`` at index
``m``.  Teams ``0`` and ``1`` sit at the central vertex, team ``x + 1`` sits
at wheel vertex ``x`` for ``x >= 1``, and every remaining team sits at the hub.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metric import CostMatrix, ClosedWalk, parse_matrix_lines, validate_metric
from .wheel import WheelInstance

# per-team passes handle this many teams at a time to bound peak memory
_TEAM_CHUNK = 512
# counting passes allocate at most this many counters at once
_COUNT_BLOCK = 1 << 25


def team_dtype(team_count: int):
    return np.int16 if team_count <= np.iinfo(np.int16).max else np.int32


def _team_chunks(team_count: int):
    for lo in range(0, team_count, _TEAM_CHUNK):
        yield slice(lo, min(lo + _TEAM_CHUNK, team_count))


@dataclass(frozen=True, eq=False)
class TtpInstance:
    wheel: WheelInstance
    hub_weight: int
    team_count: int
    placement: np.ndarray
    L: int = 1
    U: int | None = None
    venue_matrix: CostMatrix = field(init=False, repr=False)

    def __post_init__(self):
        if self.U is None:
            object.__setattr__(self, "U", self.team_count - 1)
        m = self.wheel.m
        d = np.zeros((m + 1, m + 1), dtype=np.int64)
        d[:m, :m] = self.wheel.matrix.entries
        d[m, :m] = d[:m, m] = self.hub_weight
        venue_matrix = CostMatrix(d)
        if not validate_metric(venue_matrix):
            raise ValueError(f"hub weight {self.hub_weight} half-units breaks the triangle inequality")
        object.__setattr__(self, "venue_matrix", venue_matrix)
        placement = np.asarray(self.placement, dtype=np.int64)
        placement.setflags(write=False)
        object.__setattr__(self, "placement", placement)

    @property
    def m(self) -> int:
        return self.wheel.m

    @property
    def hub(self) -> int:
        return self.wheel.m

    def team_at(self, vertex: int) -> int:
        """The team hosted at a non-central wheel vertex."""
        if not 1 <= vertex < self.m:
            raise ValueError(f"vertex {vertex} hosts no unique team")
        return vertex + 1

    def to_text(self) -> str:
        return (
            self.wheel.to_text()
            + f"hub_weight_half {self.hub_weight}\n"
            + f"teams {self.team_count}\n"
            + f"window {self.L} {self.U}\n"
            + "placement " + " ".join(str(int(x)) for x in self.placement) + "\n"
        )

    @classmethod
    def from_text(cls, text: str) -> "TtpInstance":
        lines = text.splitlines()
        _, idx = parse_matrix_lines(lines)
        # wheel block = base matrix, central, c, completed matrix
        rest_start = idx
        rest = lines[rest_start:]
        nonblank = [i for i, ln in enumerate(rest) if ln.strip()]
        _, end = parse_matrix_lines(rest, nonblank[2])
        wheel = WheelInstance.from_text("\n".join(lines[: rest_start + end]))
        fields = {}
        for ln in lines[rest_start + end:]:
            if ln.strip():
                key, _, value = ln.partition(" ")
                fields[key] = value.split()
        inst = build_ttp_instance(
            wheel,
            int(fields["hub_weight_half"][0]),
            int(fields["teams"][0]),
            L=int(fields["window"][0]),
            U=int(fields["window"][1]),
        )
        if [int(x) for x in fields["placement"]] != inst.placement.tolist():
            raise ValueError("stored placement disagrees with the canonical placement")
        return inst


def build_ttp_instance(
    wheel: WheelInstance, hub_weight: int, team_count: int, L: int = 1, U: int | None = None
) -> TtpInstance:
    """Place two teams at the central vertex, one per other wheel vertex, the rest at the hub."""
    m = wheel.m
    if team_count % 2:
        raise ValueError(f"team count must be even, got {team_count}")
    if team_count < m + 1:
        raise ValueError(f"need at least m + 1 = {m + 1} teams, got {team_count}")
    placement = np.full(team_count, m, dtype=np.int64)
    placement[0] = 0
    placement[1 : m + 1] = np.arange(m)
    return TtpInstance(wheel, hub_weight, team_count, placement, L, U)


@dataclass(frozen=True, eq=False)
class Schedule:
    """Day-indexed games stored flat: ``games[i] = (home, away)``.

    Day ``d`` holds ``games[day_starts[d]:day_starts[d + 1]]``.  ``segments``
    names contiguous day ranges (phases); ``groups`` optionally carries the
    group layout the schedule was built from.
    """

    team_count: int
    games: np.ndarray
    day_starts: np.ndarray
    segments: tuple[tuple[str, int, int], ...] = ()
    groups: object = None

    def __post_init__(self):
        games = np.asarray(self.games).reshape(-1, 2)
        dtype = team_dtype(self.team_count)
        if games.dtype != dtype:
            if games.size and (games.min() < np.iinfo(dtype).min or games.max() > np.iinfo(dtype).max):
                dtype = np.int64
            games = games.astype(dtype)
        starts = np.asarray(self.day_starts, dtype=np.int64)
        if starts.ndim != 1 or starts.size == 0 or starts[0] != 0 or starts[-1] != len(games):
            raise ValueError("day_starts must run from 0 to the number of games")
        if np.any(np.diff(starts) < 0):
            raise ValueError("day_starts must be nondecreasing")
        games.setflags(write=False)
        starts.setflags(write=False)
        object.__setattr__(self, "games", games)
        object.__setattr__(self, "day_starts", starts)

    @classmethod
    def from_days(cls, team_count: int, days, **kw) -> "Schedule":
        days = [np.asarray(day, dtype=np.int32).reshape(-1, 2) for day in days]
        starts = np.concatenate([[0], np.cumsum([len(d) for d in days])])
        games = np.concatenate(days) if days else np.zeros((0, 2), dtype=np.int32)
        return cls(team_count, games, starts, **kw)

    @classmethod
    def from_array(cls, team_count: int, arr: np.ndarray, **kw) -> "Schedule":
        """From a regular ``(days, games_per_day, 2)`` array."""
        arr = np.asarray(arr)
        starts = np.arange(arr.shape[0] + 1, dtype=np.int64) * arr.shape[1]
        return cls(team_count, arr.reshape(-1, 2), starts, **kw)

    @property
    def day_count(self) -> int:
        return len(self.day_starts) - 1

    def day(self, d: int) -> np.ndarray:
        return self.games[self.day_starts[d] : self.day_starts[d + 1]]

    def days(self) -> list[list[tuple[int, int]]]:
        return [[(int(h), int(a)) for h, a in self.day(d)] for d in range(self.day_count)]

    def game_days(self) -> np.ndarray:
        return np.repeat(np.arange(self.day_count), np.diff(self.day_starts))

    def segment(self, name: str) -> tuple[int, int]:
        for seg, start, stop in self.segments:
            if seg == name:
                return start, stop
        raise KeyError(name)

    def to_text(self) -> str:
        out = [f"{self.team_count} {self.day_count}"]
        for d in range(self.day_count):
            out.append(" ".join(f"{h}:{a}" for h, a in self.day(d)))
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Schedule":
        lines = text.splitlines()
        if not lines:
            raise ValueError("empty schedule text")
        try:
            team_count, day_count = (int(x) for x in lines[0].split())
        except ValueError:
            raise ValueError(f"bad schedule header {lines[0]!r}") from None
        body = lines[1 : 1 + day_count]
        if len(body) != day_count:
            raise ValueError(f"schedule header announces {day_count} days, found {len(body)}")
        days = []
        for ln in body:
            try:
                days.append([tuple(int(x) for x in tok.split(":")) for tok in ln.split()])
            except ValueError:
                raise ValueError(f"bad game token in line {ln[:40]!r}") from None
        return cls.from_days(team_count, days)

    def opponents(self) -> tuple[np.ndarray, np.ndarray]:
        """``(opponent, at_home)`` arrays of shape ``(days, teams)``.

        Only meaningful when every team plays exactly once per day.
        """
        opp = np.full((self.day_count, self.team_count), -1, dtype=self.games.dtype)
        at_home = np.zeros((self.day_count, self.team_count), dtype=bool)
        per_block = max(1, _COUNT_BLOCK // max(self.team_count, 1))
        for d0 in range(0, self.day_count, per_block):
            d1 = min(d0 + per_block, self.day_count)
            g = self.games[self.day_starts[d0] : self.day_starts[d1]]
            days = d0 + np.repeat(np.arange(d1 - d0), np.diff(self.day_starts[d0 : d1 + 1]))
            h, a = g[:, 0], g[:, 1]
            opp[days, h] = a
            opp[days, a] = h
            at_home[days, h] = True
        return opp, at_home


RULES = (
    "day_count",
    "games_per_day",
    "daily_participation",
    "ordered_pairs",
    "windows",
    "no_repeaters",
)


@dataclass
class ValidationReport:
    rules: dict[str, bool | None]
    messages: dict[str, str]

    @property
    def ok(self) -> bool:
        return all(v is not False for v in self.rules.values())

    @property
    def structural_ok(self) -> bool:
        return all(self.rules[r] for r in RULES[:4])

    def failures(self) -> list[str]:
        return [r for r, v in self.rules.items() if v is False]

    def to_text(self) -> str:
        lines = []
        for rule in RULES:
            v = self.rules.get(rule)
            status = "skipped" if v is None else ("pass" if v else "FAIL")
            msg = self.messages.get(rule, "")
            lines.append(f"{rule} = {status}" + (f"  # {msg}" if msg else ""))
        return "\n".join(lines) + "\n"


def _run_extremes(flags: np.ndarray) -> tuple[int, int, int, int]:
    """Min/max run lengths of True runs and of False runs, rows scanned independently.

    ``flags`` has shape (teams, days).  Returns (min_true, max_true, min_false, max_false),
    with 0 for an absent kind.
    """
    rows, cols = flags.shape
    if cols == 0:
        return 0, 0, 0, 0
    change = np.ones_like(flags, dtype=bool)
    change[:, 1:] = flags[:, 1:] != flags[:, :-1]
    starts = np.flatnonzero(change.ravel())
    lengths = np.diff(np.append(starts, flags.size))
    kinds = flags.ravel()[starts]
    out = []
    for kind in (True, False):
        sel = lengths[kinds == kind]
        out += [int(sel.min()), int(sel.max())] if sel.size else [0, 0]
    return tuple(out)


def _bad_slots(s: Schedule, N: int) -> tuple[int, tuple[int, int] | None]:
    """(count, first) of (day, team) slots not played exactly once."""
    per_block = max(1, _COUNT_BLOCK // max(N, 1))
    count, first = 0, None
    for d0 in range(0, s.day_count, per_block):
        d1 = min(d0 + per_block, s.day_count)
        g = s.games[s.day_starts[d0] : s.day_starts[d1]].astype(np.int64)
        days = np.repeat(np.arange(d1 - d0), np.diff(s.day_starts[d0 : d1 + 1]))
        slots = np.bincount(
            np.concatenate([days * N + g[:, 0], days * N + g[:, 1]]), minlength=(d1 - d0) * N
        )
        bad = np.flatnonzero(slots != 1)
        if bad.size and first is None:
            d, t = divmod(int(bad[0]), N)
            first = (d0 + d, t)
        count += bad.size
    return count, first


def _bad_pairs(s: Schedule, N: int) -> tuple[int, tuple[int, int, int] | None]:
    """(count, first) of ordered pairs not played exactly once, first as (host, guest, times)."""
    hosts_per_block = max(1, _COUNT_BLOCK // max(N, 1))
    h, a = s.games[:, 0], s.games[:, 1]
    count, first = 0, None
    for lo in range(0, N, hosts_per_block):
        hi = min(lo + hosts_per_block, N)
        sel = (h >= lo) & (h < hi)
        key = (h[sel].astype(np.int64) - lo) * N + a[sel]
        del sel
        pairs = np.bincount(key, minlength=(hi - lo) * N).reshape(hi - lo, N)
        del key
        # a team never hosts itself: shift the diagonal so 0 reads as correct
        pairs[np.arange(hi - lo), np.arange(lo, hi)] += 1
        wrong = np.argwhere(pairs != 1)
        if wrong.size and first is None:
            i, j = wrong[0]
            times = int(pairs[i, j]) - (1 if lo + i == j else 0)
            first = (lo + int(i), int(j), times)
        count += len(wrong)
    return count, first


def validate_schedule(
    inst: TtpInstance, s: Schedule, check_no_repeaters: bool = True
) -> ValidationReport:
    """Check every feasibility rule; malformed input yields failed rules, never an exception."""
    N = inst.team_count
    rules: dict[str, bool | None] = {}
    msgs: dict[str, str] = {}

    rules["day_count"] = s.day_count == 2 * (N - 1)
    if not rules["day_count"]:
        msgs["day_count"] = f"expected {2 * (N - 1)} days, got {s.day_count}"

    per_day = np.diff(s.day_starts)
    bad_days = np.flatnonzero(per_day != N // 2)
    rules["games_per_day"] = bad_days.size == 0 and s.team_count == N
    if bad_days.size:
        msgs["games_per_day"] = f"{bad_days.size} days without {N // 2} games, first is day {bad_days[0]}"
    elif s.team_count != N:
        msgs["games_per_day"] = f"schedule declares {s.team_count} teams, instance has {N}"

    g = s.games
    in_range = g.size == 0 or (int(g.min()) >= 0 and int(g.max()) < N)
    if not in_range:
        for rule in ("daily_participation", "ordered_pairs"):
            rules[rule] = False
            msgs[rule] = "team index out of range"
    else:
        count, first = _bad_slots(s, N)
        rules["daily_participation"] = count == 0
        if count:
            msgs["daily_participation"] = (
                f"{count} (day, team) slots not played exactly once; first: team {first[1]} on day {first[0]}"
            )
        count, first = _bad_pairs(s, N)
        rules["ordered_pairs"] = count == 0
        if count:
            msgs["ordered_pairs"] = (
                f"{count} ordered pairs not played exactly once; first: {first[0]} hosting {first[1]} "
                f"played {first[2]} times"
            )
        if np.any(g[:, 0] == g[:, 1]):
            rules["daily_participation"] = False
            msgs["daily_participation"] = "a team plays itself"

    if not rules["daily_participation"]:
        rules["windows"] = False
        msgs["windows"] = "not evaluated: daily participation fails"
        rules["no_repeaters"] = None if not check_no_repeaters else False
        if check_no_repeaters:
            msgs["no_repeaters"] = "not evaluated: daily participation fails"
        return ValidationReport(rules, msgs)

    opp, at_home = s.opponents()
    ext = np.zeros((0, 4), dtype=np.int64)
    repeats, first_rep = 0, None
    for sl in _team_chunks(N):
        ext = np.vstack([ext, [_run_extremes(np.ascontiguousarray(at_home[:, sl].T))]])
        if check_no_repeaters:
            rep = np.argwhere(opp[1:, sl] == opp[:-1, sl])
            if rep.size and first_rep is None:
                d, t = rep[0]
                first_rep = (int(d), sl.start + int(t), int(opp[d, sl.start + t]))
            repeats += len(rep)
    del opp, at_home

    def _lo(col):
        vals = ext[:, col][ext[:, col] > 0]
        return int(vals.min()) if vals.size else 0

    min_h, max_h, min_a, max_a = _lo(0), int(ext[:, 1].max()), _lo(2), int(ext[:, 3].max())
    lo = min(x for x in (min_h, min_a) if x > 0) if max(max_h, max_a) else 0
    hi = max(max_h, max_a)
    rules["windows"] = inst.L <= lo and hi <= inst.U
    msgs["windows"] = f"home stands {min_h}..{max_h}, road trips {min_a}..{max_a}, window [{inst.L}, {inst.U}]"

    if not check_no_repeaters:
        rules["no_repeaters"] = None
    else:
        rules["no_repeaters"] = repeats == 0
        if repeats:
            d, t, o = first_rep
            msgs["no_repeaters"] = f"{repeats // 2} repeaters; first: team {t} meets {o} on days {d}, {d + 1}"

    return ValidationReport(rules, msgs)


def venue_sequences(inst: TtpInstance, s: Schedule, teams: slice = slice(None), opponents=None) -> np.ndarray:
    """Venue of every selected team on every day, shape ``(days, teams)``."""
    opp, at_home = s.opponents() if opponents is None else opponents
    home_venue = inst.placement
    return np.where(at_home[:, teams], home_venue[teams][None, :], home_venue[opp[:, teams]])


def closed_walk_costs(dist: np.ndarray, home: np.ndarray, venues: np.ndarray) -> np.ndarray:
    """Per-team cost of home -> venues[0] -> ... -> venues[-1] -> home.

    ``venues`` has shape ``(days, teams)``; ``home`` has shape ``(teams,)``.
    """
    if venues.shape[0] == 0:
        return np.zeros(len(home), dtype=np.int64)
    cost = dist[home, venues[0]] + dist[venues[-1], home]
    cost += dist[venues[:-1], venues[1:]].sum(axis=0)
    return cost


@dataclass
class CostBreakdown:
    per_team: np.ndarray
    segments: dict[str, np.ndarray]

    @property
    def total(self) -> int:
        return int(self.per_team.sum())

    def segment_total(self, name: str, teams=None) -> int:
        costs = self.segments[name]
        return int(costs.sum() if teams is None else costs[np.asarray(teams)].sum())

    def to_text(self) -> str:
        from .metric import format_true

        lines = [f"total_half = {self.total}", f"total_true = {format_true(self.total)}"]
        for name, costs in self.segments.items():
            sub = int(costs.sum())
            lines += [f"{name}_closed_half = {sub}", f"{name}_closed_true = {format_true(sub)}"]
        return "\n".join(lines) + "\n"


class InfeasibleSchedule(ValueError):
    pass


def _require_structure(inst: TtpInstance, s: Schedule) -> ValidationReport:
    report = validate_schedule(inst, s, check_no_repeaters=False)
    if not report.structural_ok:
        raise InfeasibleSchedule(
            "schedule fails structural validation: " + ", ".join(report.failures())
        )
    return report


def evaluate_cost(inst: TtpInstance, s: Schedule, validate: bool = True) -> CostBreakdown:
    """Total travel with every team starting and ending at home.

    When the schedule carries named segments, each segment is additionally
    costed as its own closed walk from home; by the triangle inequality the
    segment costs sum to at least the true total.
    """
    if validate:
        _require_structure(inst, s)
    opponents = s.opponents()
    dist = inst.venue_matrix.entries
    N = inst.team_count
    per_team = np.zeros(N, dtype=np.int64)
    segments = {name: np.zeros(N, dtype=np.int64) for name, _, _ in s.segments}
    for sl in _team_chunks(N):
        venues = venue_sequences(inst, s, sl, opponents)
        home = inst.placement[sl]
        per_team[sl] = closed_walk_costs(dist, home, venues)
        for name, start, stop in s.segments:
            segments[name][sl] = closed_walk_costs(dist, home, venues[start:stop])
    return CostBreakdown(per_team, segments)


def team_walk(inst: TtpInstance, s: Schedule, team: int) -> ClosedWalk:
    """Venue sequence of one team: home, one venue per day, home."""
    if not 0 <= team < inst.team_count:
        raise ValueError(f"team {team} out of range 0..{inst.team_count - 1}")
    h, a = s.games[:, 0], s.games[:, 1]
    idx = np.flatnonzero((h == team) | (a == team))
    days = np.searchsorted(s.day_starts, idx, side="right") - 1
    if len(days) != s.day_count or np.any(days != np.arange(s.day_count)):
        raise InfeasibleSchedule(f"team {team} does not play exactly once per day")
    row = inst.placement[h[idx]]
    home = int(inst.placement[team])
    seq = (home,) + tuple(int(x) for x in row) + (home,)
    d = inst.venue_matrix.entries
    arr = np.asarray(seq)
    return ClosedWalk(seq, int(d[arr[:-1], arr[1:]].sum()))
