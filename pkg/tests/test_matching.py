import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsdvpr.descriptors import CompositeDescriptor, DescriptorSet
from nsdvpr.matching import (
    CostMatrix,
    build_composite_cost_matrix,
    build_cost_matrix,
    composite_distance,
    cosine_distance,
)

import oracles


def random_composites(rng, count, half_dim):
    return [
        CompositeDescriptor(
            rng.normal(size=half_dim).astype(np.float32),
            rng.normal(size=half_dim).astype(np.float32),
        )
        for _ in range(count)
    ]


class TestCosineDistance:
    @pytest.mark.parametrize(
        "a,b,expected",
        [
            ([1.0, 0.0], [1.0, 0.0], 0.0),
            ([1.0, 0.0], [0.0, 1.0], 1.0),
            ([1.0, 0.0], [-1.0, 0.0], 2.0),
        ],
    )
    def test_reference_directions(self, a, b, expected):
        assert cosine_distance(a, b) == pytest.approx(expected, abs=1e-12)

    def test_zero_vector_yields_one(self):
        assert cosine_distance([0.0, 0.0], [1.0, 2.0]) == 1.0
        assert cosine_distance([1.0, 2.0], [0.0, 0.0]) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            cosine_distance([1.0], [1.0, 2.0])

    def test_symmetry_exact(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = rng.normal(size=7)
            b = rng.normal(size=7)
            assert cosine_distance(a, b) == cosine_distance(b, a)

    @given(
        st.floats(min_value=1e-3, max_value=1e3),
        st.floats(min_value=1e-3, max_value=1e3),
        st.integers(min_value=0, max_value=2**31),
    )
    @settings(max_examples=50, deadline=None)
    def test_scale_invariance(self, alpha, beta, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=6) + 0.1
        b = rng.normal(size=6) + 0.1
        assert cosine_distance(alpha * a, beta * b) == pytest.approx(
            cosine_distance(a, b), abs=1e-6
        )


class TestBuildCostMatrix:
    def test_self_match_zero_diagonal(self):
        rng = np.random.default_rng(9)
        dset = DescriptorSet(rng.normal(1.0, 1.0, (6, 4)))
        matrix = build_cost_matrix(dset, dset)
        np.testing.assert_allclose(np.diag(matrix.values), 0.0, atol=1e-12)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(10)
        query = DescriptorSet(rng.normal(size=(3, 5)))
        reference = DescriptorSet(rng.normal(size=(2, 5)))
        matrix = build_cost_matrix(query, reference)
        for q in range(3):
            for r in range(2):
                assert matrix.values[q, r] == pytest.approx(
                    oracles.cosine(query.data[q], reference.data[r]), abs=1e-12
                )

    def test_entries_within_bounds(self):
        rng = np.random.default_rng(11)
        query = DescriptorSet(rng.normal(size=(20, 3)))
        reference = DescriptorSet(rng.normal(size=(15, 3)))
        matrix = build_cost_matrix(query, reference)
        assert matrix.values.min() >= 0.0
        assert matrix.values.max() <= 2.0

    def test_zero_rows_get_unit_distance(self):
        query = DescriptorSet(np.vstack([np.zeros(3), np.ones(3)]))
        reference = DescriptorSet(np.ones((2, 3)))
        matrix = build_cost_matrix(query, reference)
        np.testing.assert_array_equal(matrix.values[0], [1.0, 1.0])
        np.testing.assert_allclose(matrix.values[1], 0.0, atol=1e-12)

    def test_dim_mismatch_and_empty(self):
        a = DescriptorSet(np.ones((2, 3)))
        b = DescriptorSet(np.ones((2, 4)))
        with pytest.raises(ValueError, match="mismatch"):
            build_cost_matrix(a, b)
        empty = DescriptorSet(np.zeros((0, 3), dtype=np.float32))
        with pytest.raises(ValueError, match="empty"):
            build_cost_matrix(empty, a)


class TestCostMatrixValidation:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match=r"\[0, 2\]"):
            CostMatrix(np.full((2, 2), 3.0))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            CostMatrix(np.array([[0.5, np.inf], [0.1, 0.2]]))


class TestCompositeDistance:
    def test_identical_is_zero(self):
        rng = np.random.default_rng(14)
        comp = random_composites(rng, 1, 6)[0]
        assert composite_distance(comp, comp) == pytest.approx(0.0, abs=1e-12)

    def test_swapped_halves_still_zero(self):
        rng = np.random.default_rng(15)
        comp = random_composites(rng, 1, 6)[0]
        assert composite_distance(comp.swapped(), comp) == pytest.approx(0.0, abs=1e-12)

    def test_matches_two_evaluation_oracle(self):
        rng = np.random.default_rng(16)
        for _ in range(20):
            q = random_composites(rng, 1, 5)[0]
            r = random_composites(rng, 1, 5)[0]
            expected = oracles.composite_cosine(q.left, q.right, r.left, r.right)
            assert composite_distance(q, r) == pytest.approx(expected, abs=1e-12)

    def test_swap_invariance_exact(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            q = random_composites(rng, 1, 4)[0]
            r = random_composites(rng, 1, 4)[0]
            assert composite_distance(q, r) == composite_distance(q.swapped(), r)

    def test_half_dim_mismatch(self):
        a = CompositeDescriptor(np.ones(3), np.ones(3))
        b = CompositeDescriptor(np.ones(4), np.ones(4))
        with pytest.raises(ValueError, match="mismatch"):
            composite_distance(a, b)


class TestCompositeCostMatrix:
    def test_identical_lists_zero_diagonal(self):
        rng = np.random.default_rng(18)
        comps = random_composites(rng, 5, 4)
        matrix = build_composite_cost_matrix(comps, comps)
        np.testing.assert_allclose(np.diag(matrix.values), 0.0, atol=1e-12)

    def test_query_half_swap_leaves_matrix_unchanged(self):
        rng = np.random.default_rng(19)
        query = random_composites(rng, 4, 4)
        reference = random_composites(rng, 6, 4)
        base = build_composite_cost_matrix(query, reference)
        swapped = build_composite_cost_matrix([c.swapped() for c in query], reference)
        np.testing.assert_array_equal(base.values, swapped.values)

    def test_matches_per_pair_oracle(self):
        rng = np.random.default_rng(20)
        query = random_composites(rng, 4, 3)
        reference = random_composites(rng, 3, 3)
        matrix = build_composite_cost_matrix(query, reference)
        for qi, q in enumerate(query):
            for ri, r in enumerate(reference):
                expected = oracles.composite_cosine(q.left, q.right, r.left, r.right)
                assert matrix.values[qi, ri] == pytest.approx(expected, abs=1e-12)

    def test_empty_list_rejected(self):
        rng = np.random.default_rng(21)
        comps = random_composites(rng, 2, 3)
        with pytest.raises(ValueError, match="empty"):
            build_composite_cost_matrix([], comps)
