"""Approximation-preserving reduction from (1,2)-TSP to the unconstrained
Traveling Tournament Problem, with exact checks of its cost bounds."""

from .builder import GroupLayout, build_full_schedule, mirrored_double_round_robin, single_round_robin
from .extraction import cheapest_team, extract_tour
from .lreduction import forward_map, lemma2_bound, run_pipeline, verify_condition2, verify_condition3
from .metric import (
    ClosedWalk,
    CostMatrix,
    Tour,
    TspInstance,
    gen_12_instance,
    shortcut_walk,
    solve_tsp_exact,
    tour_cost,
    validate_metric,
)
from .ttp import Schedule, TtpInstance, build_ttp_instance, evaluate_cost, team_walk, validate_schedule
from .wheel import WheelInstance, build_wheel, copy_of, verify_corollary1

__version__ = "0.1.0"
