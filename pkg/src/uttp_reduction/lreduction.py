"""Forward map from boosted (1,2)-TSP to UTTP, the backward solution map, and
exact checks of the two inequality chains the reduction rests on.

Every quantity is an integer in half-units unless its name says otherwise.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .builder import build_full_schedule
from .extraction import Extraction, extract_tour
from .metric import Tour, TspInstance, format_true, make_tour, solve_tsp_exact
from .ttp import InfeasibleSchedule, TtpInstance, build_ttp_instance, evaluate_cost, validate_schedule
from .wheel import build_wheel, lift_tour

MIN_C = 5
DEFAULT_C = 6


@dataclass(frozen=True)
class BoostedTspInstance:
    base: TspInstance
    boost: int

    def objective(self, tour: Tour) -> int:
        return self.boost * tour.cost


def wheel_size(n: int, c: int) -> int:
    return c * (n - 1) + 1


def hub_weight_half(n: int, c: int) -> int:
    """w_u = (2cn - 1)/2 true units, i.e. 2cn - 1 half-units."""
    return 2 * c * n - 1


def check_c(c: int, allow_small_c: bool = False, require_even: bool = True) -> None:
    if c < 1:
        raise ValueError(f"c must be positive, got {c}")
    if c < MIN_C and not allow_small_c:
        raise ValueError(f"c = {c} is below {MIN_C}; pass allow_small_c for test runs")
    if require_even and c % 2:
        raise ValueError(
            f"c = {c} is odd: groups of size m + 1 = c(n-1) + 2 need c even for bye-free round robins"
        )


def forward_map(
    base: TspInstance,
    c: int = DEFAULT_C,
    *,
    allow_small_c: bool = False,
    require_even: bool = True,
    central: int = 0,
) -> tuple[TtpInstance, BoostedTspInstance]:
    check_c(c, allow_small_c, require_even)
    wheel = build_wheel(base, central, c)
    m = wheel.m
    inst = build_ttp_instance(wheel, hub_weight_half(base.n, c), 10 * m * (m + 1))
    return inst, BoostedTspInstance(base, m * (m + 1))


def lemma2_bound(m: int, w_half: int, c: int, K_half: int) -> int:
    """20 w_u m(m+1) + (10m-1) m cK + 8m(m+1), in half-units."""
    return 20 * w_half * m * (m + 1) + (10 * m - 1) * m * c * K_half + 16 * m * (m + 1)


def construction_bound(group_count: int, m: int, w_half: int, nu_half: int) -> int:
    """Phase-by-phase bound for any group count, with tour cost ``nu`` on the wheel.

    With ``group_count = 10m`` and ``nu = cK`` this is :func:`lemma2_bound`.
    """
    s = m + 1
    stage2_per_group = 2 * w_half * s + m * nu_half
    return (group_count - 1) * stage2_per_group + 2 * w_half * s + 16 * m * s


@dataclass
class Condition2Report:
    n: int
    c: int
    m: int
    w_half: int
    mu_star: int
    nu_star: int
    bound_at_opt: int
    chain_left: int
    chain_right: int
    a_times_opt: int

    @property
    def flags(self) -> dict[str, bool]:
        return {
            "schedule_le_bound": self.nu_star <= self.bound_at_opt,
            "bound_le_chain_left": self.bound_at_opt <= self.chain_left,
            "schedule_le_chain_left": self.nu_star <= self.chain_left,
            "chain_strict": self.chain_left < self.chain_right,
            "chain_right_le_a_opt": self.chain_right <= self.a_times_opt,
            "schedule_le_a_opt": self.nu_star <= self.a_times_opt,
        }

    @property
    def holds(self) -> bool:
        return all(self.flags.values())


def verify_condition2(n: int, c: int, w_half: int, mu_star: int, nu_star: int) -> Condition2Report:
    """Check OPT(I') <= 40c OPT(I) through the schedule built from an optimal tour.

    ``chain_left`` is the bound at the worst tour cost 2n (true units), and
    ``chain_right`` is 40 m(m+1) c n; the last step to 40c OPT(I) uses mu* >= n.
    """
    m = wheel_size(n, c)
    return Condition2Report(
        n=n,
        c=c,
        m=m,
        w_half=w_half,
        mu_star=mu_star,
        nu_star=nu_star,
        bound_at_opt=lemma2_bound(m, w_half, c, mu_star),
        chain_left=lemma2_bound(m, w_half, c, 4 * n),
        chain_right=2 * 40 * m * (m + 1) * c * n,
        a_times_opt=40 * c * m * (m + 1) * mu_star,
    )


@dataclass
class Condition3Report:
    team_count: int
    c: int
    w_half: int
    nu_prime: int
    mu_prime: int
    M: int
    mu_star: int | None = None
    nu_star: int | None = None
    boost: int | None = None

    @property
    def lower_bound(self) -> int:
        """N(2w_u + c mu' - 4)."""
        return self.team_count * (2 * self.w_half + self.c * self.mu_prime - 8)

    @property
    def flags(self) -> dict[str, bool]:
        out = {
            "team_walk_bound": self.M >= 2 * self.w_half + self.c * self.mu_prime - 8,
            "total_bound": self.nu_prime >= self.lower_bound,
        }
        if self.mu_star is not None:
            out["mu_prime_ge_mu_star"] = self.mu_prime >= self.mu_star
        return out

    @property
    def direct_gap(self) -> tuple[int, int] | None:
        """(boost(mu' - mu*), nu' - nu*) when both optima are known.

        nu* upper-bounds OPT(I'), so the first not exceeding the second is a
        sufficient check of the condition itself.
        """
        if None in (self.mu_star, self.nu_star, self.boost):
            return None
        return self.boost * (self.mu_prime - self.mu_star), self.nu_prime - self.nu_star

    @property
    def holds(self) -> bool:
        return all(self.flags.values())


def verify_condition3(
    inst: TtpInstance,
    schedule,
    mu_star: int | None = None,
    nu_star: int | None = None,
    per_team=None,
    validate: bool = True,
) -> tuple[Condition3Report, Extraction]:
    ext = extract_tour(inst, schedule, per_team, validate=validate)
    m = inst.m
    rep = Condition3Report(
        team_count=inst.team_count,
        c=inst.wheel.c,
        w_half=inst.hub_weight,
        nu_prime=ext.total,
        mu_prime=ext.K,
        M=ext.M,
        mu_star=mu_star,
        nu_star=nu_star,
        boost=m * (m + 1),
    )
    return rep, ext


@dataclass
class ReductionReport:
    """Ordered key/value record; every flag is recomputable from the numbers."""

    values: dict[str, object] = field(default_factory=dict)
    flags: dict[str, bool] = field(default_factory=dict)
    error: str | None = None
    runtime: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None and all(self.flags.values())

    def to_text(self) -> str:
        lines = [f"{k} = {v}" for k, v in self.values.items()]
        lines += [f"flag.{k} = {'pass' if v else 'FAIL'}" for k, v in self.flags.items()]
        if self.error:
            lines.append(f"error = {self.error}")
        lines.append(f"result = {'pass' if self.ok else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _put_half(values: dict, key: str, half: int) -> None:
    values[f"{key}_half"] = int(half)
    values[f"{key}_true"] = format_true(half)


def resolve_wheel_tour(wheel, tour: Tour | list[int] | None, base_opt: Tour | None) -> Tour:
    """A tour of the wheel: lifted from a base tour, taken as-is, or lifted from the optimum."""
    if tour is None:
        return lift_tour(wheel, base_opt)
    order = tour.order if isinstance(tour, Tour) else tuple(tour)
    if len(order) == wheel.m:
        return make_tour(wheel.matrix, order)
    if len(order) == wheel.n:
        return lift_tour(wheel, make_tour(wheel.base.matrix, order))
    raise ValueError(f"tour of length {len(order)} fits neither the base ({wheel.n}) nor the wheel ({wheel.m})")


def run_pipeline(
    base: TspInstance,
    c: int = DEFAULT_C,
    tour: Tour | list[int] | None = None,
    *,
    allow_small_c: bool = False,
    use_oracle: bool = True,
) -> ReductionReport:
    """Forward map, schedule construction, evaluation, extraction and all checks.

    Without ``tour`` the optimal base tour (exact oracle) is lifted to the
    wheel, which is optimal there as well.
    """
    t0 = time.perf_counter()
    report = ReductionReport()
    v, f = report.values, report.flags
    try:
        inst, boosted = forward_map(base, c, allow_small_c=allow_small_c)
        wheel = inst.wheel
        n, m, N = base.n, wheel.m, inst.team_count
        v.update(n=n, c=c, m=m, teams=N, boost=boosted.boost, a=40 * c, b=1)
        _put_half(v, "w_u", inst.hub_weight)

        base_opt = solve_tsp_exact(base.matrix) if use_oracle else None
        if base_opt is not None:
            _put_half(v, "mu_star", base_opt.cost)
            f["mu_star_in_n_2n"] = 2 * n <= base_opt.cost <= 4 * n
        if tour is None and base_opt is None:
            raise ValueError("either a tour or the oracle is required")
        wheel_tour = resolve_wheel_tour(wheel, tour, base_opt)
        v["tour_source"] = "oracle" if tour is None else "provided"
        _put_half(v, "nu_tour", wheel_tour.cost)

        schedule = build_full_schedule(inst, wheel_tour)
        val = validate_schedule(inst, schedule, check_no_repeaters=True)
        v["days"] = schedule.day_count
        v["games"] = len(schedule.games)
        for rule, ok in val.rules.items():
            f[f"schedule.{rule}"] = bool(ok)
        if not val.structural_ok:
            raise InfeasibleSchedule("built schedule fails: " + ", ".join(val.failures()))

        cost = evaluate_cost(inst, schedule, validate=False)
        layout = schedule.groups
        g1, others = layout.teams[0], layout.teams[1:].ravel()
        _put_half(v, "schedule_cost", cost.total)
        for name in ("phase1", "stage1", "stage2"):
            v[f"{name}_closed_half"] = cost.segment_total(name)
        v["phase1_non_g1_half"] = cost.segment_total("phase1", others)
        v["stage1_non_g1_half"] = cost.segment_total("stage1", others)
        v["stage1_g1_half"] = cost.segment_total("stage1", g1)
        v["stage1_g1_expected_half"] = 2 * (m + 1) * inst.hub_weight
        v["phase1_g1_max_half"] = int(cost.segments["phase1"][g1].max())
        v["phase1_g1_cap_half"] = 16 * m
        f["accounting.non_g1_phase1_zero"] = v["phase1_non_g1_half"] == 0
        f["accounting.non_g1_stage1_zero"] = v["stage1_non_g1_half"] == 0
        f["accounting.g1_stage1_exact"] = v["stage1_g1_half"] == v["stage1_g1_expected_half"]
        f["accounting.g1_phase1_cap"] = v["phase1_g1_max_half"] <= v["phase1_g1_cap_half"]

        closed_sum = sum(v[f"{name}_closed_half"] for name in ("phase1", "stage1", "stage2"))
        v["phase_closed_sum_half"] = closed_sum
        v["construction_bound_half"] = construction_bound(layout.group_count, m, inst.hub_weight, wheel_tour.cost)
        f["lemma2.total_le_phase_sum"] = cost.total <= closed_sum
        f["lemma2.phase_sum_le_bound"] = closed_sum <= v["construction_bound_half"]
        if base_opt is not None and wheel_tour.cost == c * base_opt.cost:
            v["lemma2_bound_half"] = lemma2_bound(m, inst.hub_weight, c, base_opt.cost)
            f["lemma2.total_le_bound"] = cost.total <= v["lemma2_bound_half"]

        nu_star = None
        if base_opt is not None:
            if tour is None:
                nu_star = cost.total
            else:
                opt_schedule = build_full_schedule(inst, lift_tour(wheel, base_opt))
                nu_star = evaluate_cost(inst, opt_schedule, validate=False).total
                del opt_schedule
            _put_half(v, "nu_star", nu_star)
        c3, ext = verify_condition3(
            inst, schedule,
            mu_star=None if base_opt is None else base_opt.cost,
            nu_star=nu_star,
            per_team=cost.per_team,
            validate=False,
        )
        v["cheapest_team"] = ext.team
        _put_half(v, "M", ext.M)
        _put_half(v, "mu_prime", ext.K)
        v["mu_prime_tour"] = " ".join(map(str, ext.tour.order))
        v["boosted_objective_half"] = boosted.objective(ext.tour)
        v["lemma3_lower_bound_half"] = c3.lower_bound
        for k, ok in c3.flags.items():
            f[f"lemma3.{k}"] = ok
        gap = c3.direct_gap
        if gap is not None:
            v["boosted_gap_half"], v["schedule_gap_half"] = gap
            # the gap inequality is only guaranteed from c >= 5 on
            if c >= MIN_C:
                f["condition3.boosted_gap_le_schedule_gap"] = gap[0] <= gap[1]

        if tour is None and base_opt is not None:
            c2 = verify_condition2(n, c, inst.hub_weight, base_opt.cost, cost.total)
            v["chain_left_half"] = c2.chain_left
            v["chain_right_half"] = c2.chain_right
            v["a_opt_half"] = c2.a_times_opt
            for k, ok in c2.flags.items():
                f[f"condition2.{k}"] = ok
    except Exception as exc:  # recorded, not raised: the report names the failing stage
        report.error = f"{type(exc).__name__}: {exc}"
    report.runtime = time.perf_counter() - t0
    return report
