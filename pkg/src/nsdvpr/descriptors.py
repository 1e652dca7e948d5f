"""Descriptor storage and per-dimension set normalization.

A place descriptor set is standardized dimension-by-dimension using the
mean and standard deviation of the whole set, either in one batch pass,
as a running stream (query side), or independently within caller-supplied
segments of the traverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_EPSILON = 1e-12


def _as_float32_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"descriptor data must be 2-D, got shape {arr.shape}")
    return arr


def _check_finite_matrix(arr: np.ndarray) -> None:
    bad = ~np.isfinite(arr)
    if bad.any():
        row, dim = np.argwhere(bad)[0]
        raise ValueError(f"non-finite descriptor value at row {row}, dimension {dim}")


@dataclass(frozen=True)
class DescriptorSet:
    """Ordered, immutable collection of fixed-length float32 descriptors.

    ``data`` is a (count, dim) matrix; ``labels`` optionally names each row
    (unique frame identifiers).
    """

    data: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = _as_float32_matrix(self.data)
        if arr.shape[1] < 1:
            raise ValueError("descriptor dimension must be positive")
        _check_finite_matrix(arr)
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != arr.shape[0]:
                raise ValueError(
                    f"label count {len(labels)} does not match row count {arr.shape[0]}"
                )
            if len(set(labels)) != len(labels):
                raise ValueError("labels must be unique")
            object.__setattr__(self, "labels", labels)

    @property
    def count(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def row(self, i: int) -> np.ndarray:
        return self.data[i]

    def slice_rows(self, start: int, stop: int) -> "DescriptorSet":
        labels = self.labels[start:stop] if self.labels is not None else None
        return DescriptorSet(self.data[start:stop], labels)


class NormStats:
    """Streaming per-dimension mean/std accumulator.

    Single-pass update keeps the running mean and the sum of squared
    deviations in float64; the naive sum-of-squares form cancels
    catastrophically on wide activation vectors and is deliberately
    avoided. Standard deviation uses the population convention
    (divide by n).
    """

    def __init__(self, dim: int, epsilon: float = DEFAULT_EPSILON):
        if dim < 1:
            raise ValueError("dim must be positive")
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.dim = int(dim)
        self.epsilon = float(epsilon)
        self.n = 0
        self.mean = np.zeros(dim, dtype=np.float64)
        self.m2 = np.zeros(dim, dtype=np.float64)

    @classmethod
    def from_moments(
        cls, mean, sigma, n: int, epsilon: float = DEFAULT_EPSILON
    ) -> "NormStats":
        mean = np.asarray(mean, dtype=np.float64)
        sigma = np.asarray(sigma, dtype=np.float64)
        stats = cls(mean.shape[0], epsilon)
        stats.n = int(n)
        stats.mean = mean.copy()
        stats.m2 = (sigma.astype(np.float64) ** 2) * stats.n
        return stats

    @property
    def sigma(self) -> np.ndarray:
        """Population standard deviation per dimension (zeros when n < 1)."""
        if self.n < 1:
            return np.zeros(self.dim, dtype=np.float64)
        return np.sqrt(self.m2 / self.n)

    def _check_vector(self, descriptor) -> np.ndarray:
        vec = np.asarray(descriptor, dtype=np.float64).reshape(-1)
        if vec.shape[0] != self.dim:
            raise ValueError(
                f"descriptor dimension {vec.shape[0]} does not match stats dim {self.dim}"
            )
        if not np.isfinite(vec).all():
            raise ValueError("descriptor contains non-finite values")
        return vec

    def update(self, descriptor) -> "NormStats":
        """Fold one observation into the running statistics."""
        vec = self._check_vector(descriptor)
        self.n += 1
        delta = vec - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (vec - self.mean)
        return self

    def merge(self, other: "NormStats") -> "NormStats":
        """Combine a partitioned accumulator into this one (deterministic)."""
        if other.dim != self.dim:
            raise ValueError("cannot merge stats of different dimension")
        if other.n == 0:
            return self
        if self.n == 0:
            self.n = other.n
            self.mean = other.mean.copy()
            self.m2 = other.m2.copy()
            return self
        total = self.n + other.n
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.n / total)
        self.m2 = self.m2 + other.m2 + delta * delta * (self.n * other.n / total)
        self.n = total
        return self

    def apply(self, descriptor) -> np.ndarray:
        """Standardize one vector with the current statistics.

        Dimensions whose sigma falls below epsilon map to 0; with a single
        observation sigma is undefined and the whole output is zero.
        """
        if self.n < 1:
            raise ValueError("cannot normalize with empty statistics")
        vec = self._check_vector(descriptor)
        return _standardize(vec, self.mean, self.sigma, self.epsilon)


def stats_update(stats: NormStats, descriptor) -> NormStats:
    """Functional alias for :meth:`NormStats.update`."""
    return stats.update(descriptor)


def normalize_with(stats: NormStats, descriptor) -> np.ndarray:
    """Functional alias for :meth:`NormStats.apply`."""
    return stats.apply(descriptor)


def _standardize(values64: np.ndarray, mean, sigma, epsilon: float) -> np.ndarray:
    dead = sigma < epsilon
    safe = np.where(dead, 1.0, sigma)
    z = (values64 - mean) / safe
    if z.ndim == 1:
        z[dead] = 0.0
    else:
        z[:, dead] = 0.0
    return z.astype(np.float32)


def normalize_batch(
    dset: DescriptorSet, epsilon: float = DEFAULT_EPSILON
) -> tuple[DescriptorSet, NormStats]:
    """Standardize every dimension over the whole set.

    Returns the normalized set together with the statistics used, so the
    same moments can be re-applied to individual vectors later. Dimensions
    with sigma below epsilon carry no signal and map to 0.
    """
    if dset.count < 1:
        raise ValueError("empty descriptor set")
    data64 = dset.data.astype(np.float64)
    stats = NormStats(dset.dim, epsilon)
    stats.n = dset.count
    stats.mean = data64.mean(axis=0)
    stats.m2 = data64.var(axis=0) * dset.count
    normalized = _standardize(data64, stats.mean, stats.sigma, epsilon)
    return DescriptorSet(normalized, dset.labels), stats


def normalize_segmented(
    dset: DescriptorSet,
    segments: Sequence[tuple[int, int]],
    epsilon: float = DEFAULT_EPSILON,
) -> DescriptorSet:
    """Standardize each contiguous row range independently.

    ``segments`` are half-open (start, stop) ranges that must be non-empty,
    ordered, disjoint, and cover [0, count) exactly.
    """
    validate_segments(segments, dset.count)
    pieces = []
    for start, stop in segments:
        normalized, _ = normalize_batch(dset.slice_rows(start, stop), epsilon)
        pieces.append(normalized.data)
    return DescriptorSet(np.concatenate(pieces, axis=0), dset.labels)


def validate_segments(segments: Sequence[tuple[int, int]], count: int) -> None:
    if not segments:
        raise ValueError("segment list is empty")
    expected = 0
    for start, stop in segments:
        if stop <= start:
            raise ValueError(f"empty segment ({start}, {stop})")
        if start < expected:
            raise ValueError(f"segment ({start}, {stop}) overlaps the previous one")
        if start > expected:
            raise ValueError(f"segment ({start}, {stop}) leaves a gap after row {expected}")
        expected = stop
    if expected != count:
        raise ValueError(
            f"segments cover [0, {expected}) but the set has {count} rows"
        )


@dataclass(frozen=True)
class CompositeDescriptor:
    """Two region descriptors (left, right) kept side by side.

    The concatenated form has exactly twice the half dimension; matching
    may consider both concatenation orders.
    """

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        left = np.asarray(self.left, dtype=np.float32).reshape(-1)
        right = np.asarray(self.right, dtype=np.float32).reshape(-1)
        if left.shape[0] != right.shape[0]:
            raise ValueError(
                f"half dimension mismatch: left {left.shape[0]}, right {right.shape[0]}"
            )
        if left.shape[0] < 1:
            raise ValueError("half dimension must be positive")
        if not (np.isfinite(left).all() and np.isfinite(right).all()):
            raise ValueError("non-finite value in composite descriptor")
        left.flags.writeable = False
        right.flags.writeable = False
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def half_dim(self) -> int:
        return self.left.shape[0]

    @property
    def combined(self) -> np.ndarray:
        """left-right concatenation, length 2 * half_dim."""
        return np.concatenate([self.left, self.right])

    def swapped(self) -> "CompositeDescriptor":
        return CompositeDescriptor(self.right, self.left)


def make_composite(left, right) -> CompositeDescriptor:
    """Pair a left-region and right-region descriptor of equal dimension."""
    left = np.asarray(left, dtype=np.float32).reshape(-1)
    right = np.asarray(right, dtype=np.float32).reshape(-1)
    if left.shape[0] != right.shape[0]:
        raise ValueError(
            f"dimension mismatch: left {left.shape[0]}, right {right.shape[0]}"
        )
    return CompositeDescriptor(left, right)


def composites_from_halves(
    left_set: DescriptorSet, right_set: DescriptorSet
) -> list[CompositeDescriptor]:
    """Zip two aligned half-descriptor sets into composite descriptors."""
    if left_set.count != right_set.count:
        raise ValueError("half sets must have the same row count")
    if left_set.dim != right_set.dim:
        raise ValueError("half sets must have the same dimension")
    return [
        CompositeDescriptor(left_set.data[i], right_set.data[i])
        for i in range(left_set.count)
    ]


def split_composites(
    composites: Iterable[CompositeDescriptor],
) -> tuple[DescriptorSet, DescriptorSet]:
    """Unzip composite descriptors into (left halves, right halves) sets."""
    comps = list(composites)
    if not comps:
        raise ValueError("empty composite list")
    left = np.stack([c.left for c in comps])
    right = np.stack([c.right for c in comps])
    return DescriptorSet(left), DescriptorSet(right)
