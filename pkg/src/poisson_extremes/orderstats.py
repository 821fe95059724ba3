"""Enumeration of small-functional k-tuples and order-statistic extraction.

``enumerate_below`` is the reference engine: it visits unordered k-subsets of
the input, evaluates the tuple functional once per subset and keeps admissible
values below the threshold.  Duplicated values from distinct subsets are
retained.  The grid strategy prunes pair enumeration for functionals that
dominate the pairwise point distance and must reproduce brute force exactly.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EnumerationStrategy",
    "enumerate_below",
    "grid_pair_candidates",
    "m_smallest",
    "rescale",
]


@dataclass(frozen=True)
class EnumerationStrategy:
    """How to enumerate candidate tuples: exhaustive or distance-pruned."""

    kind: str = "brute_force"
    cell_size: float | None = None

    def __post_init__(self):
        if self.kind not in ("brute_force", "grid_prune"):
            raise ValueError(f"unknown enumeration strategy {self.kind!r}")
        if self.cell_size is not None and not self.cell_size > 0:
            raise ValueError("cell_size must be positive")


def grid_pair_candidates(points: np.ndarray, radius: float, cell_size: float | None = None):
    """Indices (i, j), i < j, of all pairs within ``radius``, via spatial hashing.

    Cells of side ``cell_size`` (default: radius); the neighbourhood ring is
    widened when cells are smaller than the radius so no pair is missed.
    Yields a superset of the within-radius pairs; callers re-check distances.
    """
    pts = np.asarray(points, dtype=float)
    n, d = pts.shape
    if radius <= 0:
        return
    cell = float(cell_size) if cell_size else float(radius)
    reach = int(math.ceil(radius / cell))
    cells: dict[tuple, list[int]] = {}
    keys = np.floor(pts / cell).astype(np.int64)
    for i in range(n):
        cells.setdefault(tuple(keys[i]), []).append(i)
    offsets = list(itertools.product(range(-reach, reach + 1), repeat=d))
    for i in range(n):
        home = keys[i]
        for off in offsets:
            bucket = cells.get(tuple(home + off))
            if not bucket:
                continue
            for j in bucket:
                if j > i:
                    yield i, j


def enumerate_below(items, k: int, f, threshold: float,
                    strategy: EnumerationStrategy | None = None,
                    points: np.ndarray | None = None) -> list[float]:
    """Sorted admissible values f(tuple) <= threshold over unordered k-subsets.

    ``f`` returns a float or None (not admissible).  ``grid_prune`` requires
    k == 2 and point coordinates (``points`` or ``items`` itself); it is only
    valid when f dominates pairwise distance, which the caller certifies.
    """
    strategy = strategy or EnumerationStrategy()
    n = len(items)
    if k < 1:
        raise ValueError("tuple arity must be at least 1")
    values: list[float] = []
    if strategy.kind == "grid_prune":
        if k != 2:
            raise ValueError("grid_prune supports pair functionals only")
        coords = points if points is not None else np.asarray(items, dtype=float)
        if not isinstance(coords, np.ndarray) or coords.ndim != 2:
            raise ValueError("grid_prune needs an (n, d) coordinate array")
        for i, j in grid_pair_candidates(coords, threshold, strategy.cell_size):
            val = f((items[i], items[j]))
            if val is not None and val <= threshold:
                values.append(float(val))
    else:
        for combo in itertools.combinations(range(n), k):
            val = f(tuple(items[i] for i in combo))
            if val is not None and val <= threshold:
                values.append(float(val))
    values.sort()
    return values


def m_smallest(values, m: int) -> list[float]:
    """The m smallest values in ascending order (all of them if fewer)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return []
    return heapq.nsmallest(m, values)


def rescale(values, t: float, gamma: float) -> np.ndarray:
    """Rescaled values t^gamma * v; order preserving since t^gamma > 0."""
    if t <= 0:
        raise ValueError("t must be positive")
    return np.asarray(values, dtype=float) * t**gamma
