"""Distance matrices, tours and closed walks with exact integer costs.

Every distance is stored in half-units (twice the true distance) so that
half-integral hub weights stay integral.  ``true_units`` converts back.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

ORACLE_LIMIT_ENV = "UTTP_ORACLE_LIMIT"
DEFAULT_ORACLE_LIMIT = 20


def true_units(half: int) -> Fraction:
    return Fraction(int(half), 2)


def format_true(half: int) -> str:
    """Render a half-unit value in true units, e.g. ``47 -> '23.5'``."""
    half = int(half)
    if half % 2 == 0:
        return str(half // 2)
    return f"{half // 2}.5" if half > 0 else f"-{(-half) // 2}.5"


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Symmetric, zero-diagonal, nonnegative integer matrix in half-units."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise ValueError(f"cost matrix must be square and non-empty, got shape {arr.shape}")
        if not np.array_equal(arr, arr.T):
            raise ValueError("cost matrix is not symmetric")
        if np.any(np.diag(arr) != 0):
            raise ValueError("cost matrix has a nonzero diagonal")
        if np.any(arr < 0):
            raise ValueError("cost matrix has negative entries")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def from_true(cls, rows) -> "CostMatrix":
        """Build from true-unit distances (integers or halves)."""
        arr = np.asarray(rows, dtype=float) * 2
        if not np.allclose(arr, np.round(arr)):
            raise ValueError("true distances must be multiples of 1/2")
        return cls(np.round(arr).astype(np.int64))

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, key):
        return self.entries[key]

    def __eq__(self, other):
        if not isinstance(other, CostMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def to_text(self) -> str:
        lines = [str(self.size)]
        lines += [" ".join(str(int(x)) for x in row) for row in self.entries]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CostMatrix":
        return parse_matrix_lines(text.splitlines())[0]


def parse_matrix_lines(lines: Sequence[str], start: int = 0) -> tuple[CostMatrix, int]:
    """Parse one matrix block beginning at ``lines[start]``.

    Returns the matrix and the index of the first line after the block.
    Blank lines are skipped.
    """
    idx = start
    while idx < len(lines) and not lines[idx].strip():
        idx += 1
    if idx >= len(lines):
        raise ValueError("expected a matrix size line, got end of input")
    try:
        size = int(lines[idx].strip())
    except ValueError:
        raise ValueError(f"line {idx + 1}: expected matrix size, got {lines[idx]!r}") from None
    if size <= 0:
        raise ValueError(f"line {idx + 1}: matrix size must be positive")
    rows = []
    idx += 1
    for _ in range(size):
        if idx >= len(lines):
            raise ValueError("matrix block truncated")
        try:
            row = [int(tok) for tok in lines[idx].split()]
        except ValueError:
            raise ValueError(f"line {idx + 1}: non-integer matrix entry") from None
        if len(row) != size:
            raise ValueError(f"line {idx + 1}: expected {size} entries, got {len(row)}")
        rows.append(row)
        idx += 1
    return CostMatrix(np.array(rows, dtype=np.int64)), idx


def validate_metric(matrix: CostMatrix) -> bool:
    """True iff ``d[i, k] <= d[i, j] + d[j, k]`` for all i, j, k."""
    d = matrix.entries
    # min over j of d[i, j] + d[j, k]; the j = i term equals d[i, k] itself
    via = np.min(d[:, :, None] + d[None, :, :], axis=1)
    return bool(np.all(d <= via))


@dataclass(frozen=True)
class Tour:
    """A Hamiltonian cycle given as a vertex order, with its half-unit cost."""

    order: tuple[int, ...]
    cost: int

    def __len__(self):
        return len(self.order)

    def rotated_to(self, vertex: int) -> "Tour":
        i = self.order.index(vertex)
        return Tour(self.order[i:] + self.order[:i], self.cost)

    def to_text(self) -> str:
        return f"{len(self.order)} {self.cost}\n" + " ".join(map(str, self.order)) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Tour":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if len(lines) != 2:
            raise ValueError("tour text must have a header line and an order line")
        size, cost = (int(x) for x in lines[0].split())
        order = tuple(int(x) for x in lines[1].split())
        if len(order) != size:
            raise ValueError(f"tour header says {size} vertices, order has {len(order)}")
        return cls(order, cost)


@dataclass(frozen=True)
class ClosedWalk:
    """Vertex sequence with ``sequence[0] == sequence[-1]`` and its half-unit cost."""

    sequence: tuple[int, ...]
    cost: int

    def __post_init__(self):
        if len(self.sequence) == 0 or self.sequence[0] != self.sequence[-1]:
            raise ValueError("closed walk must start and end at the same vertex")


def walk_cost(matrix: CostMatrix, sequence: Sequence[int]) -> int:
    """Sum of consecutive entries along ``sequence`` (no implicit closing edge)."""
    seq = np.asarray(sequence, dtype=np.int64)
    if seq.size < 2:
        return 0
    return int(matrix.entries[seq[:-1], seq[1:]].sum())


def closed_walk(matrix: CostMatrix, sequence: Sequence[int]) -> ClosedWalk:
    seq = tuple(int(x) for x in sequence)
    return ClosedWalk(seq, walk_cost(matrix, seq))


def _check_permutation(order: Sequence[int], size: int) -> tuple[int, ...]:
    order = tuple(int(x) for x in order)
    if sorted(order) != list(range(size)):
        raise ValueError(f"order is not a permutation of 0..{size - 1}: {order}")
    return order


def tour_cost(matrix: CostMatrix, order: Sequence[int]) -> int:
    order = _check_permutation(order, matrix.size)
    return walk_cost(matrix, order + order[:1])


def make_tour(matrix: CostMatrix, order: Sequence[int]) -> Tour:
    order = _check_permutation(order, matrix.size)
    return Tour(order, tour_cost(matrix, order))


def shortcut_walk(matrix: CostMatrix, walk: ClosedWalk | Sequence[int]) -> Tour:
    """Shortcut a spanning closed walk into a Hamiltonian tour.

    Later occurrences of already-visited vertices are dropped left to right,
    which on a metric never increases the cost.
    """
    if not validate_metric(matrix):
        raise ValueError("shortcutting requires a metric cost matrix")
    seq = walk.sequence if isinstance(walk, ClosedWalk) else tuple(walk)
    missing = set(range(matrix.size)) - set(seq)
    if missing:
        raise ValueError(f"walk misses vertices {sorted(missing)}")
    order = tuple(dict.fromkeys(int(x) for x in seq))
    return make_tour(matrix, order)


@dataclass(frozen=True)
class TspInstance:
    """Complete graph with true edge costs in {1, 2}."""

    matrix: CostMatrix

    def __post_init__(self):
        d = self.matrix.entries
        off = d[~np.eye(self.matrix.size, dtype=bool)]
        if self.matrix.size < 2 or not np.all((off == 2) | (off == 4)):
            raise ValueError("(1,2)-TSP instances need off-diagonal true costs in {1, 2}")
        assert validate_metric(self.matrix)

    @property
    def n(self) -> int:
        return self.matrix.size

    @classmethod
    def from_true(cls, rows) -> "TspInstance":
        return cls(CostMatrix.from_true(rows))


def gen_12_instance(n: int, density: float, seed: int) -> TspInstance:
    """Random (1,2)-TSP instance; each edge costs 1 with probability ``density``."""
    if n < 3:
        raise ValueError("need at least 3 vertices")
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    cheap = rng.random(len(iu[0])) < density
    d = np.zeros((n, n), dtype=np.int64)
    d[iu] = np.where(cheap, 2, 4)
    return TspInstance(CostMatrix(d + d.T))


def oracle_limit() -> int:
    raw = os.environ.get(ORACLE_LIMIT_ENV)
    return int(raw) if raw else DEFAULT_ORACLE_LIMIT


def solve_tsp_exact(matrix: CostMatrix, limit: int | None = None) -> Tour:
    """Minimum-cost Hamiltonian tour by dynamic programming over subsets.

    Subsets are processed one cardinality layer at a time with vectorized
    transitions, so sizes up to about 20 stay tractable.
    """
    limit = oracle_limit() if limit is None else limit
    n = matrix.size
    if n > limit:
        raise ValueError(f"exact TSP oracle is limited to {limit} vertices, got {n}")
    d = matrix.entries
    if n <= 3:
        return make_tour(matrix, range(n))

    k = n - 1  # vertex 0 is the fixed start; bit j stands for vertex j + 1
    inf = np.iinfo(np.int64).max // 4
    full = 1 << k
    dp = np.full((full, k), inf, dtype=np.int64)
    parent = np.full((full, k), -1, dtype=np.int8)
    for j in range(k):
        dp[1 << j, j] = d[0, j + 1]
    masks = np.arange(full, dtype=np.int64)
    popcount = np.zeros(full, dtype=np.int64)
    for j in range(k):
        popcount += (masks >> j) & 1
    inner = d[1:, 1:]
    for size in range(2, k + 1):
        layer = masks[popcount == size]
        for j in range(k):
            sel = layer[(layer >> j) & 1 == 1]
            prev = sel ^ (1 << j)
            cand = dp[prev] + inner[:, j][None, :]
            best = np.argmin(cand, axis=1)
            dp[sel, j] = cand[np.arange(len(sel)), best]
            parent[sel, j] = best

    closing = dp[full - 1] + d[1:, 0]
    last = int(np.argmin(closing))
    path = []
    mask = full - 1
    while last >= 0:
        path.append(last + 1)
        prev = int(parent[mask, last])
        mask ^= 1 << last
        last = prev
    order = [0] + path[::-1]
    tour = make_tour(matrix, order)
    assert tour.cost == int(closing.min())
    return tour


def brute_force_tsp(matrix: CostMatrix) -> Tour:
    """Enumerate every tour through vertex 0.  Only for tiny instances."""
    n = matrix.size
    if n > 10:
        raise ValueError("permutation enumeration is limited to 10 vertices")
    best = None
    for rest in itertools.permutations(range(1, n)):
        cost = tour_cost(matrix, (0,) + rest)
        if best is None or cost < best[0]:
            best = (cost, (0,) + rest)
    return Tour(best[1], best[0])


def uniform_matrix(size: int, half_cost: int) -> CostMatrix:
    d = np.full((size, size), half_cost, dtype=np.int64)
    np.fill_diagonal(d, 0)
    return CostMatrix(d)


def read_instance(path) -> TspInstance:
    with open(path, encoding="utf-8") as fh:
        return TspInstance(CostMatrix.from_text(fh.read()))


def write_text_atomic(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def orders_equal_cyclic(a: Iterable[int], b: Iterable[int]) -> bool:
    """Same cycle up to rotation and reversal."""
    a, b = list(a), list(b)
    if len(a) != len(b):
        return False
    if not a:
        return True
    for cand in (b, b[::-1]):
        if a[0] in cand:
            i = cand.index(a[0])
            if cand[i:] + cand[:i] == a:
                return True
    return False
