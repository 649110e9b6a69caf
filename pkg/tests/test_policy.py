import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from collabarm.obs import HEAD_CONTINUOUS, HEAD_DISCRETE, NormStats
from collabarm.policy import (
    ArchSpec,
    PolicyActor,
    ShapeError,
    act,
    detokenize,
    forward,
    init_params,
    tokenize,
    tokenize_array,
)
from collabarm.util import WARNING_COUNTERS, reset_warnings


def unit_stats():
    return NormStats(min=np.array([-1.0] * 3), max=np.array([1.0] * 3),
                     mean=np.array([0.0] * 3), std=np.array([1.0] * 3))


class TestDetokenize:
    def test_lower_endpoint(self):
        assert detokenize(0, 256, -1.0, 1.0) == -1.0

    def test_upper_endpoint(self):
        assert detokenize(255, 256, -1.0, 1.0) == 1.0

    def test_hand_evaluation_token_51(self):
        # 51/255 * 2 - 1 = -0.6
        assert detokenize(51, 256, -1.0, 1.0) == pytest.approx(-0.6)

    def test_out_of_range_token_rejected(self):
        with pytest.raises(ValueError):
            detokenize(256, 256)
        with pytest.raises(ValueError):
            detokenize(-1, 256)

    def test_monotone_in_token(self):
        vals = [detokenize(t, 256) for t in range(256)]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestTokenize:
    def test_endpoints(self):
        assert tokenize(-1.0, 256) == 0
        assert tokenize(1.0, 256) == 255

    def test_round_trip_all_tokens(self):
        for t in range(256):
            assert tokenize(detokenize(t, 256), 256) == t

    def test_half_bin_error_bound(self):
        # detokenize(tokenize(a)) is within half a bin of a; oracle is the
        # bin width computed directly from the grid definition.
        rng = np.random.Generator(np.random.PCG64(123))
        half_bin = (1.0 - (-1.0)) / (2 * (256 - 1))
        a = rng.uniform(-1, 1, size=10_000)
        toks = tokenize_array(a, 256)
        back = toks / 255.0 * 2.0 - 1.0
        assert np.max(np.abs(back - a)) <= half_bin + 1e-12

    def test_out_of_bounds_clamped_and_counted(self):
        reset_warnings()
        assert tokenize(1.5, 256) == 255
        assert WARNING_COUNTERS["tokenize.out_of_bounds"] == 1


class TestForward:
    def test_zero_params_continuous_gives_zero(self):
        arch = ArchSpec(input_dim=5, hidden=(4,), head=HEAD_CONTINUOUS)
        params = init_params(arch, 0)
        for w in params.weights:
            w[:] = 0.0
        out = forward(params, np.ones(5))
        assert np.allclose(out, 0.0)

    def test_deterministic(self):
        arch = ArchSpec(input_dim=6, head=HEAD_DISCRETE, vocab_size=16)
        params = init_params(arch, 1)
        x = np.linspace(-1, 1, 6)
        assert np.array_equal(forward(params, x), forward(params, x))

    def test_discrete_logit_shape(self):
        arch = ArchSpec(input_dim=6, hidden=(8,), head=HEAD_DISCRETE, vocab_size=16)
        params = init_params(arch, 1)
        assert forward(params, np.zeros(6)).shape == (3, 16)
        assert forward(params, np.zeros((4, 6))).shape == (4, 3, 16)

    def test_shape_mismatch_named(self):
        arch = ArchSpec(input_dim=6, head=HEAD_CONTINUOUS)
        params = init_params(arch, 1)
        with pytest.raises(ShapeError, match="input layer"):
            forward(params, np.zeros(7))

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**31))
    def test_outputs_finite_on_random_inputs(self, seed):
        arch = ArchSpec(input_dim=9, hidden=(12, 12), head=HEAD_CONTINUOUS)
        params = init_params(arch, 7)
        rng = np.random.Generator(np.random.PCG64(seed))
        out = forward(params, rng.normal(scale=3.0, size=9))
        assert np.all(np.isfinite(out))


class TestAct:
    def test_peaked_logits_give_full_positive_action(self):
        arch = ArchSpec(input_dim=4, hidden=(4,), head=HEAD_DISCRETE, vocab_size=256)
        params = init_params(arch, 0)
        for w in params.weights:
            w[:] = 0.0
        for b in params.biases:
            b[:] = 0.0
        # Bias the last logit of every dimension: argmax token 255 -> +1.
        params.biases[-1][np.arange(255, 3 * 256, 256)] = 10.0
        a = act(params, np.zeros(2), np.zeros(2), unit_stats())
        assert a.as_tuple() == (1.0, 1.0, 1.0)

    def test_continuous_zero_output_is_stats_mean(self):
        stats = NormStats(min=np.array([-1.0] * 3), max=np.array([1.0] * 3),
                          mean=np.array([0.3, -0.4, 0.5]), std=np.array([1.0] * 3))
        arch = ArchSpec(input_dim=4, hidden=(4,), head=HEAD_CONTINUOUS)
        params = init_params(arch, 0)
        for w in params.weights:
            w[:] = 0.0
        a = act(params, np.zeros(2), np.zeros(2), stats)
        assert a.as_tuple() == pytest.approx((0.3, -0.4, 0.5))

    def test_action_always_within_bounds(self):
        stats = NormStats(min=np.array([-1.0] * 3), max=np.array([1.0] * 3),
                          mean=np.array([0.0] * 3), std=np.array([10.0] * 3))
        arch = ArchSpec(input_dim=4, hidden=(8,), head=HEAD_CONTINUOUS)
        params = init_params(arch, 3)
        rng = np.random.Generator(np.random.PCG64(0))
        for _ in range(200):
            a = act(params, rng.normal(size=2), rng.normal(size=2), stats)
            assert -1.0 <= a.dx <= 1.0 and -1.0 <= a.dy <= 1.0 and -1.0 <= a.grip <= 1.0

    def test_argmax_invariant_to_constant_logit_shift(self):
        arch = ArchSpec(input_dim=4, hidden=(6,), head=HEAD_DISCRETE, vocab_size=32)
        params = init_params(arch, 5)
        x_i, x_o = np.ones(2), np.ones(2)
        before = act(params, x_i, x_o, unit_stats())
        shifted = params.copy()
        shifted.biases[-1][0:32] += 7.5  # same constant on every logit of dim 0
        after = act(shifted, x_i, x_o, unit_stats())
        assert before == after

    def test_policy_actor_snapshots_params(self):
        arch = ArchSpec(input_dim=4, hidden=(4,), head=HEAD_CONTINUOUS)
        params = init_params(arch, 2)
        actor = PolicyActor(params, unit_stats())
        before = actor.act(np.zeros(2), np.zeros(2))
        params.weights[0][:] = 99.0  # mutating the source must not leak in
        assert actor.act(np.zeros(2), np.zeros(2)) == before
