"""The wheel graph: ``c`` copies of a base graph glued at a central vertex.

Layout: vertex 0 is the central vertex; copy ``i`` (1-based) occupies the
contiguous block ``1 + (i-1)(n-1) .. i(n-1)``, holding the non-central base
vertices in increasing order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import (
    CostMatrix,
    Tour,
    TspInstance,
    make_tour,
    parse_matrix_lines,
    solve_tsp_exact,
    validate_metric,
)

ALL_COPIES = 0


@dataclass(frozen=True)
class WheelInstance:
    base: TspInstance
    c: int
    central: int
    matrix: CostMatrix
    copy_map: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.matrix.size

    def vertex_of(self, copy: int, base_vertex: int) -> int:
        """Inverse of :func:`copy_of` for non-central vertices."""
        if base_vertex == self.central:
            return 0
        if not 1 <= copy <= self.c:
            raise ValueError(f"copy {copy} out of range 1..{self.c}")
        rank = base_vertex if base_vertex < self.central else base_vertex - 1
        return 1 + (copy - 1) * (self.n - 1) + rank

    def copy_vertices(self, copy: int) -> list[int]:
        start = 1 + (copy - 1) * (self.n - 1)
        return list(range(start, start + self.n - 1))

    def to_text(self) -> str:
        return (
            self.base.matrix.to_text()
            + f"{self.central}\n{self.c}\n"
            + self.matrix.to_text()
        )

    @classmethod
    def from_text(cls, text: str) -> "WheelInstance":
        lines = text.splitlines()
        base, idx = parse_matrix_lines(lines)
        rest = [ln for ln in lines[idx:] if ln.strip()]
        central, c = int(rest[0]), int(rest[1])
        completed, _ = parse_matrix_lines(rest, 2)
        wheel = build_wheel(TspInstance(base), central, c)
        if wheel.matrix != completed:
            raise ValueError("stored wheel matrix disagrees with its base, central vertex and c")
        return wheel


def build_wheel(base: TspInstance, central: int, c: int) -> WheelInstance:
    """Glue ``c`` copies of ``base`` at ``central`` and take the metric completion.

    Within a copy distances are the base distances; across copies the
    shortest path runs through the central vertex.
    """
    n = base.n
    if c < 1:
        raise ValueError("copy count c must be at least 1")
    if not 0 <= central < n:
        raise ValueError(f"central vertex {central} out of range 0..{n - 1}")

    others = [x for x in range(n) if x != central]
    copy_map = [(ALL_COPIES, central)]
    for i in range(1, c + 1):
        copy_map += [(i, x) for x in others]
    m = c * (n - 1) + 1
    assert len(copy_map) == m

    copies = np.array([cp for cp, _ in copy_map])
    bases = np.array([b for _, b in copy_map])
    d = base.matrix.entries
    same = d[bases[:, None], bases[None, :]]
    via = d[bases, central][:, None] + d[central, bases][None, :]
    shared = (copies[:, None] == copies[None, :]) | (copies[:, None] == ALL_COPIES) | (
        copies[None, :] == ALL_COPIES
    )
    full = np.where(shared, same, via)
    np.fill_diagonal(full, 0)
    matrix = CostMatrix(full)
    assert validate_metric(matrix)
    return WheelInstance(base, c, central, matrix, tuple(copy_map))


def copy_of(wheel: WheelInstance, vertex: int) -> tuple[int, int]:
    """(copy index, base vertex); the central vertex reports ``ALL_COPIES``."""
    if not 0 <= vertex < wheel.m:
        raise ValueError(f"vertex {vertex} out of range 0..{wheel.m - 1}")
    return wheel.copy_map[vertex]


def lift_tour(wheel: WheelInstance, tour: Tour) -> Tour:
    """Traverse the base tour once per copy, passing through the central vertex.

    The result costs exactly ``c`` times the base tour.
    """
    base_order = tour.rotated_to(wheel.central).order
    order = [0]
    for i in range(1, wheel.c + 1):
        order += [wheel.vertex_of(i, x) for x in base_order[1:]]
    lifted = make_tour(wheel.matrix, order)
    assert lifted.cost == wheel.c * tour.cost
    return lifted


@dataclass(frozen=True)
class Corollary1Report:
    opt_base: int
    opt_wheel: int
    c: int

    @property
    def holds(self) -> bool:
        return self.opt_wheel == self.c * self.opt_base


def verify_corollary1(base: TspInstance, central: int, c: int) -> Corollary1Report:
    wheel = build_wheel(base, central, c)
    return Corollary1Report(
        opt_base=solve_tsp_exact(base.matrix).cost,
        opt_wheel=solve_tsp_exact(wheel.matrix).cost,
        c=c,
    )
