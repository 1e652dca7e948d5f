"""Ground-truth construction, PR-curve scoring, sweeps, and PCA diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .descriptors import DescriptorSet
from .matching import CostMatrix
from .sequence import MatchResult, SearchParams, match_all

EARTH_RADIUS_M = 6371008.8

PLANAR = "planar_m"
WGS84 = "wgs84"
COORDINATE_KINDS = (PLANAR, WGS84)


@dataclass(frozen=True)
class Traverse:
    """One pass through a route: ordered frames with timestamps and 2-D positions.

    Positions are (x, y) meters for planar_m or (lat, lon) degrees for wgs84.
    """

    frame_ids: tuple[str, ...]
    timestamps: np.ndarray
    positions: np.ndarray
    coordinate_kind: str = PLANAR

    def __post_init__(self):
        ids = tuple(str(x) for x in self.frame_ids)
        ts = np.asarray(self.timestamps, dtype=np.float64).reshape(-1)
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError(f"positions must be (n, 2), got shape {pos.shape}")
        if not (len(ids) == ts.shape[0] == pos.shape[0]):
            raise ValueError("frame_ids, timestamps, and positions lengths differ")
        if not np.isfinite(ts).all() or not np.isfinite(pos).all():
            raise ValueError("traverse contains non-finite values")
        if ts.shape[0] >= 2 and (np.diff(ts) < 0).any():
            first = int(np.argmax(np.diff(ts) < 0))
            raise ValueError(f"timestamps decrease at frame {first + 1}")
        if self.coordinate_kind not in COORDINATE_KINDS:
            raise ValueError(f"unknown coordinate kind {self.coordinate_kind!r}")
        ts.flags.writeable = False
        pos = np.ascontiguousarray(pos)
        pos.flags.writeable = False
        object.__setattr__(self, "frame_ids", ids)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "positions", pos)

    @property
    def count(self) -> int:
        return self.positions.shape[0]

    def select(self, indices) -> "Traverse":
        idx = np.asarray(indices, dtype=np.int64)
        return Traverse(
            tuple(self.frame_ids[i] for i in idx),
            self.timestamps[idx],
            self.positions[idx],
            self.coordinate_kind,
        )


def _haversine_m(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Great-circle distance in meters between (lat, lon) degree arrays."""
    lat1, lon1 = np.radians(a[..., 0]), np.radians(a[..., 1])
    lat2, lon2 = np.radians(b[..., 0]), np.radians(b[..., 1])
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = np.sin(dlat / 2.0) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def _distance(kind: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if kind == WGS84:
        return _haversine_m(a, b)
    return np.sqrt(((a - b) ** 2).sum(axis=-1))


def step_distances(traverse: Traverse) -> np.ndarray:
    """Distance in meters between consecutive frames."""
    return _distance(
        traverse.coordinate_kind, traverse.positions[:-1], traverse.positions[1:]
    )


def resample_by_distance(traverse: Traverse, spacing_m: float) -> Traverse:
    """Greedy spatial thinning: keep a frame once the path since the last
    kept frame has accumulated at least spacing_m."""
    if traverse.count < 2:
        raise ValueError("resampling needs at least 2 frames")
    if spacing_m <= 0:
        raise ValueError("spacing_m must be positive")
    steps = step_distances(traverse)
    kept = [0]
    acc = 0.0
    for i in range(1, traverse.count):
        acc += steps[i - 1]
        if acc >= spacing_m:
            kept.append(i)
            acc = 0.0
    return traverse.select(kept)


@dataclass(frozen=True)
class GroundTruth:
    """Per-query true reference index; -1 marks queries with no true match."""

    mapping: np.ndarray
    tolerance_m: float | None = None

    def __post_init__(self):
        arr = np.asarray(self.mapping, dtype=np.int64).reshape(-1)
        if arr.shape[0] < 1:
            raise ValueError("ground truth mapping is empty")
        if (arr < -1).any():
            raise ValueError("mapping entries must be >= -1")
        arr.flags.writeable = False
        object.__setattr__(self, "mapping", arr)

    @property
    def query_count(self) -> int:
        return self.mapping.shape[0]


def associate_ground_truth(
    query: Traverse, reference: Traverse, tolerance_m: float
) -> GroundTruth:
    """Map each query frame to its positionally nearest reference frame.

    Queries farther than tolerance_m from every reference frame are marked
    unmatched and later drop out of the recall denominator.
    """
    if query.count < 1 or reference.count < 1:
        raise ValueError("traverses must be non-empty")
    if query.coordinate_kind != reference.coordinate_kind:
        raise ValueError(
            f"coordinate kind mismatch: query {query.coordinate_kind}, "
            f"reference {reference.coordinate_kind}"
        )
    d = _distance(
        query.coordinate_kind,
        query.positions[:, None, :],
        reference.positions[None, :, :],
    )
    nearest = d.argmin(axis=1)
    best = d[np.arange(query.count), nearest]
    mapping = np.where(best <= tolerance_m, nearest, -1)
    return GroundTruth(mapping, float(tolerance_m))


def interpolate_anchors(
    anchors: Sequence[tuple[int, int]], query_count: int
) -> GroundTruth:
    """Piecewise-linear ground truth from sparse (query, reference) anchors.

    Outside the anchored span the boundary segment's slope is extended.
    Interpolated indices round to the nearest integer (half away from zero)
    and clamp at 0.
    """
    if len(anchors) < 2:
        raise ValueError("need at least 2 anchors")
    aq = np.asarray([a[0] for a in anchors], dtype=np.float64)
    ar = np.asarray([a[1] for a in anchors], dtype=np.float64)
    if (np.diff(aq) <= 0).any():
        raise ValueError("anchor query indices must be strictly increasing")
    qs = np.arange(query_count, dtype=np.float64)
    refs = np.interp(qs, aq, ar)
    lo = qs < aq[0]
    hi = qs > aq[-1]
    slope_lo = (ar[1] - ar[0]) / (aq[1] - aq[0])
    slope_hi = (ar[-1] - ar[-2]) / (aq[-1] - aq[-2])
    refs[lo] = ar[0] + slope_lo * (qs[lo] - aq[0])
    refs[hi] = ar[-1] + slope_hi * (qs[hi] - aq[-1])
    rounded = np.where(refs >= 0.0, np.floor(refs + 0.5), np.ceil(refs - 0.5))
    return GroundTruth(np.maximum(rounded, 0).astype(np.int64), None)


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class PRCurve:
    points: tuple[PRPoint, ...]
    max_f1: float

    @classmethod
    def from_points(cls, points: Sequence[PRPoint]) -> "PRCurve":
        pts = tuple(points)
        if not pts:
            raise ValueError("PR curve needs at least one point")
        return cls(pts, max(p.f1 for p in pts))


def score_matches(
    results: Sequence[MatchResult], gt: GroundTruth, within_frames: int
) -> PRCurve:
    """Sweep the uniqueness acceptance threshold into a full PR curve.

    A result is accepted at threshold theta iff its uniqueness is >= theta.
    Accepted results within within_frames of the true reference are TP,
    all other accepted results FP. Scorable queries (recall denominator)
    are those that produced a match and have a true reference; the sweep
    visits every distinct observed uniqueness plus a sentinel on each side.
    """
    if len(results) != gt.query_count:
        raise ValueError(
            f"got {len(results)} results for {gt.query_count} ground-truth queries"
        )
    if within_frames < 0:
        raise ValueError("within_frames must be >= 0")

    has_result = np.array([r.best_reference is not None for r in results])
    best = np.array(
        [r.best_reference if r.best_reference is not None else -1 for r in results],
        dtype=np.int64,
    )
    uniq = np.array(
        [r.uniqueness if r.uniqueness is not None else np.nan for r in results]
    )
    gt_map = gt.mapping

    scorable = has_result & (gt_map >= 0)
    n_scorable = int(scorable.sum())
    if n_scorable == 0:
        raise ValueError("no scorable queries (nothing past warm-up with ground truth)")
    correct = scorable & (np.abs(best - gt_map) <= within_frames)

    observed = np.unique(uniq[has_result])
    observed = observed[~np.isnan(observed)]
    thresholds = [0.0] + [float(v) for v in observed]
    if observed.size and math.isfinite(observed[-1]):
        thresholds.append(float(observed[-1]) + 1.0)

    points = []
    for theta in thresholds:
        accepted = has_result & (uniq >= theta)
        tp = int((accepted & correct).sum())
        fp = int((accepted & ~correct).sum())
        precision = tp / (tp + fp) if (tp + fp) > 0 else 1.0
        recall = tp / n_scorable
        f1 = 2.0 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
        points.append(PRPoint(theta, precision, recall, f1))
    return PRCurve.from_points(points)


def sweep_sequence_length(
    matrix: CostMatrix,
    gt: GroundTruth,
    lengths: Sequence[int],
    params: SearchParams,
    within_frames: int,
) -> list[tuple[int, float]]:
    """max-F1 as a function of the sequence length, in input order."""
    if not lengths:
        raise ValueError("no sequence lengths given")
    if len(set(lengths)) != len(lengths):
        raise ValueError("sequence lengths must be distinct")
    if any(l < 1 for l in lengths):
        raise ValueError("sequence lengths must be positive")
    out = []
    for l in lengths:
        results = match_all(matrix, params.with_seq_len(int(l)))
        curve = score_matches(results, gt, within_frames)
        out.append((int(l), curve.max_f1))
    return out


def principal_axes(
    dset: DescriptorSet, components: int
) -> tuple[np.ndarray, np.ndarray]:
    """Top principal axes (dim x components) and their eigenvalues.

    Covariance eigendecomposition at float64; each axis is sign-fixed so
    its first nonzero loading is positive, making the projection
    deterministic.
    """
    if components < 1:
        raise ValueError("components must be >= 1")
    if dset.count < components:
        raise ValueError(
            f"need at least {components} rows for {components} components, "
            f"got {dset.count}"
        )
    data = dset.data.astype(np.float64)
    centered = data - data.mean(axis=0)
    cov = centered.T @ centered / dset.count
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:components]
    axes = eigvecs[:, order]
    values = eigvals[order]
    for c in range(axes.shape[1]):
        nonzero = np.nonzero(np.abs(axes[:, c]) > 1e-12)[0]
        if nonzero.size and axes[nonzero[0], c] < 0:
            axes[:, c] = -axes[:, c]
    return axes, values


def pca_project(dset: DescriptorSet, components: int = 2) -> np.ndarray:
    """Center the rows and project onto the top principal axes."""
    axes, _ = principal_axes(dset, components)
    data = dset.data.astype(np.float64)
    centered = data - data.mean(axis=0)
    return centered @ axes
