import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from collabarm.env import TASKS, reset
from collabarm.obs import (
    HEAD_CONTINUOUS,
    HEAD_DISCRETE,
    AugmentConfig,
    DegenerateStatsError,
    HistoryStack,
    NormStats,
    augment,
    compute_stats,
    denormalize_action,
    encode,
    instruction_onehot,
    normalize_action,
    state_vector,
)


class TestEncoding:
    def test_state_vector_layout(self):
        s = reset(TASKS["drawer close"], 4)
        v = state_vector(s)
        assert v.shape == (9,)
        assert v[0] == s.gripper_pos[0] and v[1] == s.gripper_pos[1]
        assert v[2] == 0.0
        assert v[7] == s.articulation
        assert v[8] == 0.0

    def test_instruction_exactly_one_hot(self):
        for name in TASKS:
            v = instruction_onehot(name)
            assert v.sum() == 1.0
            assert v[list(TASKS).index(name)] == 1.0

    def test_raster_encode_is_flat(self):
        s = reset(TASKS["reach"], 0)
        assert encode(s, "raster").shape == (1024,)

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            encode(reset(TASKS["reach"], 0), "pointcloud")


class TestHistory:
    def test_zero_padded_at_start(self):
        h = HistoryStack(k=3, dim=2)
        h.push(np.array([1.0, 2.0]))
        stacked = h.stacked()
        assert np.array_equal(stacked, [0, 0, 0, 0, 1, 2])
        assert len(h) == 1

    def test_window_contents_exact(self):
        # At step t the stack holds observations t-k+1..t, oldest first.
        k = 3
        h = HistoryStack(k=k, dim=1)
        for t in range(1, 8):
            h.push(np.array([float(t)]))
            expected = [max(t - k + 1 + i, 0) if t - k + 1 + i >= 1 else 0 for i in range(k)]
            expected = [float(v) for v in expected]
            assert h.stacked().tolist() == expected

    def test_length_is_min_of_k_and_elapsed(self):
        h = HistoryStack(k=4, dim=1)
        for t in range(10):
            assert len(h) == min(4, t)
            h.push(np.array([0.0]))


class TestAugment:
    def test_disabled_is_identity(self):
        rng = np.random.Generator(np.random.PCG64(0))
        img = rng.uniform(0, 1, size=1024)
        out = augment(img, rng, AugmentConfig(enabled=False))
        assert np.array_equal(out, img)

    def test_brightness_only_hand_check(self):
        # All-0.5 raster, brightness factor 1.2, no crop or contrast: 0.6.
        img = np.full(1024, 0.5)

        class FixedRng:
            def __init__(self):
                self.calls = 0

            def uniform(self, lo, hi):
                self.calls += 1
                if self.calls <= 2:   # crop offsets
                    return 0.0
                if self.calls == 3:   # brightness delta
                    return 0.2
                return 1.0            # contrast

        cfg = AugmentConfig(crop_fraction=1.0, brightness=0.2, contrast=(1.0, 1.0))
        out = augment(img, FixedRng(), cfg)
        assert np.allclose(out, 0.6, atol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31))
    def test_output_clamped(self, seed):
        rng = np.random.Generator(np.random.PCG64(seed))
        img = rng.uniform(0, 1, size=1024)
        out = augment(img, rng)
        assert out.min() >= 0.0 and out.max() <= 1.0
        assert out.shape == img.shape

    def test_seeded_reproducibility(self):
        img = np.linspace(0, 1, 1024)
        a = augment(img, np.random.Generator(np.random.PCG64(5)))
        b = augment(img, np.random.Generator(np.random.PCG64(5)))
        assert np.array_equal(a, b)


def _stats():
    return NormStats(
        min=np.array([-1.0, -1.0, -1.0]), max=np.array([1.0, 1.0, 1.0]),
        mean=np.array([0.1, -0.2, 0.3]), std=np.array([0.5, 0.5, 2.0]),
    )


class TestNormalization:
    def test_mean_maps_to_zero_continuous(self):
        stats = _stats()
        out = normalize_action(stats.mean, stats, HEAD_CONTINUOUS)
        assert np.allclose(out, 0.0)

    def test_discrete_endpoints(self):
        stats = _stats()
        assert np.allclose(normalize_action(stats.min, stats, HEAD_DISCRETE), 0.0)
        assert np.allclose(normalize_action(stats.max, stats, HEAD_DISCRETE), 1.0)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**31), head=st.sampled_from([HEAD_DISCRETE, HEAD_CONTINUOUS]))
    def test_round_trip_identity(self, seed, head):
        stats = _stats()
        rng = np.random.Generator(np.random.PCG64(seed))
        a = rng.uniform(-1, 1, size=(20, 3))
        back = denormalize_action(normalize_action(a, stats, head), stats, head)
        assert np.max(np.abs(back - a)) < 1e-9

    def test_round_trip_thousand_random_actions(self):
        stats = _stats()
        rng = np.random.Generator(np.random.PCG64(77))
        a = rng.uniform(-1, 1, size=(1000, 3))
        for head in (HEAD_DISCRETE, HEAD_CONTINUOUS):
            back = denormalize_action(normalize_action(a, stats, head), stats, head)
            assert np.max(np.abs(back - a)) < 1e-9


class TestComputeStats:
    def test_empty_dataset_rejected(self):
        with pytest.raises(DegenerateStatsError):
            compute_stats(np.zeros((0, 3)))

    def test_single_sample_rejected(self):
        with pytest.raises(DegenerateStatsError, match="single-sample"):
            compute_stats(np.array([[0.1, 0.2, 0.3]]))

    def test_two_action_arithmetic(self):
        stats = compute_stats(np.array([[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
        assert stats.mean[0] == 0.0
        assert stats.min[0] == -1.0 and stats.max[0] == 1.0

    def test_flat_dimension_falls_back_to_bounds(self):
        # Dimension 1 never varies; min-max normalization falls back to the
        # action bounds and std to the floor.
        stats = compute_stats(np.array([[-0.5, 0.3, 0.0], [0.5, 0.3, 1.0]]))
        assert stats.min[1] == -1.0 and stats.max[1] == 1.0
        assert stats.std[1] == pytest.approx(1e-6)

    def test_reproducible(self):
        rng = np.random.Generator(np.random.PCG64(3))
        a = rng.uniform(-1, 1, size=(100, 3))
        s1, s2 = compute_stats(a), compute_stats(a)
        assert np.array_equal(s1.mean, s2.mean) and np.array_equal(s1.std, s2.std)

    def test_invariants_enforced(self):
        with pytest.raises(DegenerateStatsError):
            NormStats(min=np.ones(3), max=np.ones(3), mean=np.zeros(3), std=np.ones(3))
        with pytest.raises(DegenerateStatsError):
            NormStats(min=np.zeros(3), max=np.ones(3), mean=np.zeros(3), std=np.zeros(3))
