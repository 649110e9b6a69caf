import numpy as np
import pytest

from collabarm.arbiter import ArbiterConfig, MODE_COLLAB
from collabarm.env import Action, TASKS
from collabarm.expert import scripted_expert
from collabarm.learnloop import (
    Buffer,
    CollabLearnConfig,
    CollectionStalledError,
    collect_round,
    harvest_expert_samples,
    run,
)
from collabarm.obs import NormStats
from collabarm.policy import ArchSpec, PolicyActor, init_params
from collabarm.train import Dataset, Sample, TrainConfig


def unit_stats():
    return NormStats(min=np.array([-1.0] * 3), max=np.array([1.0] * 3),
                     mean=np.array([0.0] * 3), std=np.array([1.0] * 3))


def sample(i=0):
    return Sample(task="reach", instruction=np.zeros(10), observation=np.zeros(9),
                  action=np.zeros(3), actor="expert", episode_id=i, step_index=i)


class ZeroPolicy:
    def act(self, instruction, observation):
        return Action(0.0, 0.0, 0.0)


class TestBuffer:
    def test_capacity_enforced(self):
        buf = Buffer(capacity=3)
        kept = [buf.add(sample(i)) for i in range(5)]
        assert kept == [True, True, True, False, False]
        assert len(buf) == 3

    def test_flush_clears(self):
        buf = Buffer(capacity=2)
        buf.add(sample(0))
        buf.add(sample(1))
        ds = Dataset()
        n = buf.flush_into(ds)
        assert n == 2 and len(ds) == 2 and len(buf) == 0


class TestCollect:
    def _cfg(self, capacity, tasks=("reach",), n=4, cap=2000):
        return CollabLearnConfig(
            rounds=1, buffer_capacity=capacity,
            train=TrainConfig(steps=1), tasks=tasks,
            arbiter=ArbiterConfig(mode=MODE_COLLAB, n=n), episode_cap=cap,
        )

    def test_zero_capacity_returns_immediately(self):
        buf = Buffer(capacity=0)
        records = collect_round(ZeroPolicy(), lambda t: scripted_expert(t),
                                self._cfg(0), buf, np.random.SeedSequence(0))
        assert records == [] and len(buf) == 0

    def test_full_length_episode_fills_buffer_exactly(self):
        # Zero policy and a zero expert: the reach episode runs 500 steps,
        # contributing exactly 100 expert steps at N=4.
        class ZeroExpert:
            latency_ticks = 1

            def action(self, state):
                return Action(0.0, 0.0, 0.0)

        buf = Buffer(capacity=100)
        records = collect_round(ZeroPolicy(), lambda t: ZeroExpert(),
                                self._cfg(100), buf, np.random.SeedSequence(1))
        assert len(records) == 1
        assert len(buf) == 100

    def test_only_expert_samples_enter_buffer(self):
        buf = Buffer(capacity=40)
        collect_round(ZeroPolicy(), lambda t: scripted_expert(t),
                      self._cfg(40), buf, np.random.SeedSequence(2))
        assert all(s.actor == "expert" for s in buf.samples)

    def test_stall_aborts_with_diagnostic(self):
        class NoopExpert:
            latency_ticks = 1

            def action(self, state):
                return Action(0.0, 0.0, 0.0)

        # Noop expert and noop policy never succeed and produce expert steps
        # slowly; with a 1-episode cap the round cannot fill a big buffer.
        with pytest.raises(CollectionStalledError):
            collect_round(ZeroPolicy(), lambda t: NoopExpert(),
                          self._cfg(10_000, cap=1), Buffer(capacity=10_000),
                          np.random.SeedSequence(3))

    def test_harvest_keeps_failed_episode_expert_steps(self):
        from collabarm.arbiter import run_episode

        class ZeroExpert:
            latency_ticks = 1

            def action(self, state):
                return Action(0.0, 0.0, 0.0)

        record = run_episode(ZeroPolicy(), ZeroExpert(), TASKS["reach"], 0,
                             ArbiterConfig(mode=MODE_COLLAB, n=4))
        assert not record.success
        samples = harvest_expert_samples(record, 7)
        assert len(samples) == record.expert_steps
        assert all(s.episode_id == 7 for s in samples)


class TestRun:
    def _small_cfg(self, rounds=1, seed=5):
        # Collection cycles a task subset while the policy keeps its full
        # ten-task instruction space.
        return CollabLearnConfig(
            rounds=rounds, buffer_capacity=30,
            train=TrainConfig(steps=20, seed=2),
            tasks=("reach", "button press"),
            instruction_names=tuple(TASKS),
            arbiter=ArbiterConfig(mode=MODE_COLLAB, n=4), seed=seed,
        )

    def _params(self):
        return init_params(ArchSpec(input_dim=19, hidden=(16,), head="continuous"), 0)

    def test_dataset_grows_by_capacity_per_round(self):
        collected = []

        def expert_for(task):
            return scripted_expert(task)

        cfg = self._small_cfg(rounds=3)
        _, metrics = run(self._params(), unit_stats(), expert_for, cfg)
        assert [m.expert_steps for m in metrics] == [30, 30, 30]

    def test_deterministic_metrics(self):
        cfg = self._small_cfg(rounds=2)
        _, m1 = run(self._params(), unit_stats(), lambda t: scripted_expert(t), cfg)
        _, m2 = run(self._params(), unit_stats(), lambda t: scripted_expert(t), cfg)
        assert [a.to_dict() for a in m1] == [b.to_dict() for b in m2]

    def test_single_round_equals_collect_plus_fit(self):
        cfg = self._small_cfg(rounds=1)
        tuned, metrics = run(self._params(), unit_stats(), lambda t: scripted_expert(t), cfg)
        assert len(metrics) == 1
        assert metrics[0].expert_steps == 30
        # parameters moved
        assert not np.array_equal(tuned.weights[0], self._params().weights[0])

    def test_retune_consumes_only_expert_actor_samples(self):
        seen = []

        real_fit = None

        import collabarm.learnloop as ll

        original = ll.fit

        def spy_fit(params, dataset, stats, cfg, mix_dataset=None):
            seen.extend(s.actor for s in dataset.samples)
            return original(params, dataset, stats, cfg, mix_dataset=mix_dataset)

        ll.fit = spy_fit
        try:
            run(self._params(), unit_stats(), lambda t: scripted_expert(t), self._small_cfg())
        finally:
            ll.fit = original
        assert seen and all(actor == "expert" for actor in seen)
