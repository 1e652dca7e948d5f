"""Sequence search over a cost matrix.

For a query at time T, candidate reference trajectories are straight
lines through the matrix ending at (T, i): over the l+1 time steps
t = T-l .. T the reference index is round(i - k * (T - t)), with the
slope k swept over tan(pi/4 + delta) for delta within a fixed angular
band around the matrix diagonal. The lowest accumulated cost over all
feasible (i, k) picks the match; the acceptance score is the best cost
found outside a window around the winner divided by the winner's cost.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .matching import CostMatrix


@dataclass(frozen=True)
class SearchParams:
    """Knobs for the trajectory search.

    seq_len is in frames (the caller converts from meters); slope_count
    must be odd so the exact diagonal slope is always tested.
    """

    seq_len: int
    slope_count: int = 11
    angle_halfwidth: float = 0.2
    uniqueness_window: int = 10

    def __post_init__(self):
        if self.seq_len < 1:
            raise ValueError("seq_len must be >= 1")
        if self.slope_count < 1 or self.slope_count % 2 == 0:
            raise ValueError("slope_count must be a positive odd integer")
        if not 0.0 <= self.angle_halfwidth < math.pi / 4:
            raise ValueError("angle_halfwidth must lie in [0, pi/4)")
        if self.uniqueness_window < 1:
            raise ValueError("uniqueness_window must be >= 1")

    def with_seq_len(self, seq_len: int) -> "SearchParams":
        return replace(self, seq_len=seq_len)


@dataclass
class MatchResult:
    """Best reference for one query, or None when no candidate is feasible."""

    query_index: int
    best_reference: int | None
    seq_cost: float | None
    uniqueness: float | None
    accepted: bool = False


def slope_grid(slope_count: int, angle_halfwidth: float) -> np.ndarray:
    """Slopes tan(pi/4 + delta) on an odd uniform delta grid.

    The middle delta is exactly 0 and maps to slope 1.0 exactly
    (math.tan(pi/4) falls one ulp short of 1).
    """
    half = (slope_count - 1) // 2
    if half == 0:
        deltas = [0.0]
    else:
        step = angle_halfwidth / half
        deltas = [j * step for j in range(-half, half + 1)]
    return np.array(
        [1.0 if d == 0.0 else math.tan(math.pi / 4 + d) for d in deltas],
        dtype=np.float64,
    )


def _round_half_away(v: np.ndarray) -> np.ndarray:
    return np.where(v >= 0.0, np.floor(v + 0.5), np.ceil(v - 0.5))


def sequence_cost(
    matrix: CostMatrix, T: int, i: int, k: float, seq_len: int
) -> float | None:
    """Accumulated cost of the slope-k trajectory ending at (T, i).

    Returns None (infeasible) when the window reaches before time 0 or any
    rounded reference index leaves the matrix; infeasible candidates are
    skipped, never clamped, so matrix corners are not silently rewarded.
    """
    vals = matrix.values
    rows, cols = vals.shape
    if not 0 <= T < rows:
        raise ValueError(f"query index {T} outside [0, {rows})")
    if not 0 <= i < cols:
        raise ValueError(f"reference index {i} outside [0, {cols})")
    if k <= 0:
        raise ValueError("slope must be positive")
    if seq_len < 1:
        raise ValueError("seq_len must be >= 1")
    if T - seq_len < 0:
        return None
    total = 0.0
    for t in range(T - seq_len, T + 1):
        v = i - k * (T - t)
        j = math.floor(v + 0.5) if v >= 0.0 else math.ceil(v - 0.5)
        if j < 0 or j >= cols:
            return None
        total += float(vals[t, j])
    return total


def search(matrix: CostMatrix, T: int, params: SearchParams) -> MatchResult:
    """Best reference endpoint for query T over all slopes and endpoints.

    Ties in the endpoint argmin break toward the smallest reference index.
    Produces a no-match result when T has insufficient history or nothing
    is feasible.
    """
    vals = matrix.values
    rows, cols = vals.shape
    if not 0 <= T < rows:
        raise ValueError(f"query index {T} outside [0, {rows})")
    l = params.seq_len
    if T - l < 0:
        return MatchResult(T, None, None, None)

    ts = np.arange(T - l, T + 1)
    dts = np.arange(l, -1, -1, dtype=np.float64)[None, :]
    endpoints = np.arange(cols, dtype=np.float64)[:, None]
    best = np.full(cols, np.inf)
    for k in slope_grid(params.slope_count, params.angle_halfwidth):
        raw = _round_half_away(endpoints - k * dts)
        feasible = ((raw >= 0.0) & (raw < cols)).all(axis=1)
        idx = np.clip(raw, 0, cols - 1).astype(np.int64)
        # Sequential accumulation in ascending t keeps sums bit-identical
        # to a scalar loop, independent of any vectorization.
        cost = np.zeros(cols)
        for j in range(l + 1):
            cost += vals[ts[j], idx[:, j]]
        cost[~feasible] = np.inf
        np.minimum(best, cost, out=best)

    if not np.isfinite(best).any():
        return MatchResult(T, None, None, None)
    best_ref = int(np.argmin(best))
    best_cost = float(best[best_ref])
    outside = best[np.abs(np.arange(cols) - best_ref) > params.uniqueness_window]
    outside_best = float(outside.min()) if outside.size else math.inf
    if not math.isfinite(outside_best):
        uniqueness = math.inf
    elif best_cost == 0.0:
        uniqueness = math.inf if outside_best > 0.0 else 1.0
    else:
        uniqueness = outside_best / best_cost
    return MatchResult(T, best_ref, best_cost, uniqueness)


def match_all(
    matrix: CostMatrix, params: SearchParams, workers: int = 1
) -> list[MatchResult]:
    """Run the search for every query row, in query order.

    Per-query searches are pure, so a thread pool gives bit-identical
    results to the serial path.
    """
    if matrix.rows < 1:
        raise ValueError("empty cost matrix")
    indices = range(matrix.rows)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda T: search(matrix, T, params), indices))
    return [search(matrix, T, params) for T in indices]


def apply_acceptance(results: list[MatchResult], threshold: float) -> list[MatchResult]:
    """Mark results whose uniqueness clears the threshold as accepted."""
    marked = []
    for r in results:
        accepted = r.uniqueness is not None and r.uniqueness >= threshold
        marked.append(replace_accepted(r, accepted))
    return marked


def replace_accepted(result: MatchResult, accepted: bool) -> MatchResult:
    return MatchResult(
        result.query_index,
        result.best_reference,
        result.seq_cost,
        result.uniqueness,
        accepted,
    )
