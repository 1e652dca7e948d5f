"""Cosine-distance cost matrices for whole-image and composite descriptors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .descriptors import CompositeDescriptor, DescriptorSet

ZERO_NORM_THRESHOLD = 1e-12


@dataclass(frozen=True)
class CostMatrix:
    """Dense query x reference matrix of cosine distances, values in [0, 2]."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"cost matrix must be non-empty 2-D, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("cost matrix contains non-finite entries")
        if arr.min() < 0.0 or arr.max() > 2.0:
            raise ValueError("cost matrix entries must lie in [0, 2]")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def cosine_distance(a, b) -> float:
    """1 - cos(a, b), clipped to [0, 2].

    A vector with norm below 1e-12 is maximally uninformative and yields
    1.0 rather than an error: zero vectors legitimately arise from the
    online-normalization cold start.
    """
    va = np.asarray(a, dtype=np.float64).reshape(-1)
    vb = np.asarray(b, dtype=np.float64).reshape(-1)
    if va.shape[0] != vb.shape[0]:
        raise ValueError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na < ZERO_NORM_THRESHOLD or nb < ZERO_NORM_THRESHOLD:
        return 1.0
    d = 1.0 - float(va @ vb) / (na * nb)
    return min(max(d, 0.0), 2.0)


def _pairwise_cosine(query: np.ndarray, reference: np.ndarray) -> np.ndarray:
    q = query.astype(np.float64)
    r = reference.astype(np.float64)
    qn = np.linalg.norm(q, axis=1)
    rn = np.linalg.norm(r, axis=1)
    q_zero = qn < ZERO_NORM_THRESHOLD
    r_zero = rn < ZERO_NORM_THRESHOLD
    q /= np.where(q_zero, 1.0, qn)[:, None]
    r /= np.where(r_zero, 1.0, rn)[:, None]
    d = 1.0 - q @ r.T
    d[q_zero, :] = 1.0
    d[:, r_zero] = 1.0
    np.clip(d, 0.0, 2.0, out=d)
    return d


def build_cost_matrix(query: DescriptorSet, reference: DescriptorSet) -> CostMatrix:
    """Cosine distance of every query row against every reference row."""
    if query.count < 1 or reference.count < 1:
        raise ValueError("cannot build a cost matrix from an empty set")
    if query.dim != reference.dim:
        raise ValueError(
            f"dimension mismatch: query {query.dim}, reference {reference.dim}"
        )
    return CostMatrix(_pairwise_cosine(query.data, reference.data))


def composite_distance(q: CompositeDescriptor, r: CompositeDescriptor) -> float:
    """Order-invariant composite distance.

    The reference concatenation order is fixed left-right; the query is
    tried in both orders and the smaller cosine distance wins, so a
    left/right swap of the query halves never hurts.
    """
    if q.half_dim != r.half_dim:
        raise ValueError(
            f"half dimension mismatch: query {q.half_dim}, reference {r.half_dim}"
        )
    ref = r.combined
    return min(
        cosine_distance(q.combined, ref),
        cosine_distance(q.swapped().combined, ref),
    )


def build_composite_cost_matrix(
    query: Sequence[CompositeDescriptor], reference: Sequence[CompositeDescriptor]
) -> CostMatrix:
    """Composite distance of every query frame against every reference frame."""
    if len(query) < 1 or len(reference) < 1:
        raise ValueError("cannot build a cost matrix from an empty composite list")
    half = query[0].half_dim
    if any(c.half_dim != half for c in query) or any(
        c.half_dim != half for c in reference
    ):
        raise ValueError("composite half dimensions are inconsistent")
    q_fwd = np.stack([c.combined for c in query])
    q_swp = np.stack([c.swapped().combined for c in query])
    ref = np.stack([c.combined for c in reference])
    d = np.minimum(_pairwise_cosine(q_fwd, ref), _pairwise_cosine(q_swp, ref))
    return CostMatrix(d)
