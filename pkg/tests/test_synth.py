import numpy as np
import pytest

from nsdvpr.descriptors import normalize_batch
from nsdvpr.matching import (
    build_cost_matrix,
    composite_distance,
)
from nsdvpr.synth import SynthConfig, generate


AFFINE = dict(condition_scale_range=(0.5, 2.0), condition_offset_sigma=1.0)


class TestConfigValidation:
    def test_odd_dim_rejected(self):
        with pytest.raises(ValueError, match="even"):
            SynthConfig(n_places=10, dim=7, seed=0)

    def test_bad_scale_range_rejected(self):
        with pytest.raises(ValueError, match="a_min"):
            SynthConfig(n_places=10, dim=8, seed=0, condition_scale_range=(0.0, 1.0))

    def test_too_few_places_rejected(self):
        with pytest.raises(ValueError, match="n_places"):
            SynthConfig(n_places=1, dim=8, seed=0)


class TestGenerate:
    def test_identity_world_query_equals_reference(self):
        world = generate(SynthConfig(n_places=30, dim=8, seed=2))
        np.testing.assert_array_equal(world.query.data, world.reference.data)
        np.testing.assert_array_equal(world.ground_truth.mapping, np.arange(30))

    def test_same_seed_is_bit_identical(self):
        cfg = SynthConfig(n_places=25, dim=8, seed=9, noise_sigma=0.7, **AFFINE)
        a = generate(cfg)
        b = generate(cfg)
        np.testing.assert_array_equal(a.reference.data, b.reference.data)
        np.testing.assert_array_equal(a.query.data, b.query.data)
        for ca, cb in zip(a.query_composites, b.query_composites):
            np.testing.assert_array_equal(ca.left, cb.left)
            np.testing.assert_array_equal(ca.right, cb.right)

    def test_affine_condition_cancelled_by_normalization(self):
        world = generate(SynthConfig(n_places=80, dim=16, seed=3, **AFFINE))
        ref, _ = normalize_batch(world.reference)
        qry, _ = normalize_batch(world.query)
        np.testing.assert_allclose(qry.data, ref.data, atol=1e-5)

    def test_normalized_cost_matrix_has_zero_diagonal_raw_does_not(self):
        world = generate(SynthConfig(n_places=80, dim=16, seed=4, **AFFINE))
        raw = build_cost_matrix(world.query, world.reference)
        ref, _ = normalize_batch(world.reference)
        qry, _ = normalize_batch(world.query)
        nsd = build_cost_matrix(qry, ref)
        assert np.abs(np.diag(nsd.values)).max() < 1e-5
        assert np.abs(np.diag(raw.values)).max() > 1e-2

    def test_traverse_layout_on_line(self):
        world = generate(SynthConfig(n_places=10, dim=8, seed=5, spacing_m=2.0))
        np.testing.assert_array_equal(
            world.reference_traverse.positions[:, 0], 2.0 * np.arange(10)
        )
        assert world.reference_traverse.coordinate_kind == "planar_m"


class TestReverse:
    def test_reverse_world_is_forward_with_halves_swapped(self):
        fwd = generate(SynthConfig(n_places=20, dim=8, seed=6, noise_sigma=0.2, **AFFINE))
        rev = generate(
            SynthConfig(n_places=20, dim=8, seed=6, noise_sigma=0.2, reverse=True, **AFFINE)
        )
        for f, r in zip(fwd.query_composites, rev.query_composites):
            np.testing.assert_array_equal(f.left, r.right)
            np.testing.assert_array_equal(f.right, r.left)
        half = 4
        np.testing.assert_array_equal(rev.query.data[:, :half], fwd.query.data[:, half:])
        np.testing.assert_array_equal(rev.query.data[:, half:], fwd.query.data[:, :half])

    def test_composite_distance_unchanged_under_reversal(self):
        fwd = generate(SynthConfig(n_places=15, dim=8, seed=7, **AFFINE))
        rev = generate(SynthConfig(n_places=15, dim=8, seed=7, reverse=True, **AFFINE))
        for p in range(15):
            df = composite_distance(fwd.query_composites[p], fwd.reference_composites[p])
            dr = composite_distance(rev.query_composites[p], rev.reference_composites[p])
            assert df == dr


class TestConditionSegments:
    def test_segments_partition_the_traverse(self):
        world = generate(
            SynthConfig(n_places=21, dim=8, seed=8, condition_segment_count=2, **AFFINE)
        )
        assert world.condition_segments == [(0, 10), (10, 21)]

    def test_single_segment_matches_global_condition(self):
        a = generate(SynthConfig(n_places=20, dim=8, seed=10, **AFFINE))
        b = generate(
            SynthConfig(n_places=20, dim=8, seed=10, condition_segment_count=1, **AFFINE)
        )
        np.testing.assert_array_equal(a.query.data, b.query.data)
