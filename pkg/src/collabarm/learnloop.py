"""The collaboration learning loop, end to end: run collaboration episodes,
harvest expert-step samples into a bounded buffer, flush the buffer into the
fine-tune dataset, re-tune the policy, and repeat for a configured number of
rounds."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arbiter import ACTOR_EXPERT, ArbiterConfig, EpisodeRecord, run_episode
from .env import TASKS, TaskSpec
from .obs import NormStats, instruction_onehot
from .policy import PolicyParams, PolicyActor
from .train import Dataset, Sample, TrainConfig, fit


class CollectionStalledError(RuntimeError):
    """The buffer is not filling: the expert appears unable to act."""


@dataclass
class Buffer:
    """Bounded store of expert-step samples; cleared on every flush."""

    capacity: int = 2000
    samples: list[Sample] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def full(self) -> bool:
        return len(self.samples) >= self.capacity

    def add(self, sample: Sample) -> bool:
        """Add unless full; returns whether the sample was kept."""
        if self.full:
            return False
        self.samples.append(sample)
        return True

    def flush_into(self, dataset: Dataset) -> int:
        n = len(self.samples)
        dataset.extend(self.samples)
        self.samples = []
        return n


@dataclass(frozen=True)
class CollabLearnConfig:
    rounds: int = 1
    buffer_capacity: int = 2000
    train: TrainConfig = TrainConfig()
    tasks: tuple[str, ...] = tuple(TASKS)
    arbiter: ArbiterConfig = ArbiterConfig(n=4)
    seed: int = 0
    episode_cap: int = 2000          # per round, before declaring a stall
    obs_mode: str = "state-vector"
    history_k: int = 1
    eval_trials: int = 0             # per-round policy-only probe; 0 disables
    instruction_names: tuple[str, ...] | None = None   # policy's task list

    @property
    def task_names(self) -> tuple[str, ...]:
        return self.instruction_names or self.tasks

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")


def harvest_expert_samples(record: EpisodeRecord, episode_id: int,
                           task_names: tuple[str, ...] = tuple(TASKS)) -> list[Sample]:
    """Expert-actor steps of an episode as training rows. Failed episodes
    contribute too: the expert's steps are near-optimal even when the episode
    ran out of budget."""
    instruction = instruction_onehot(record.task, task_names)
    out = []
    for s in record.steps:
        if s.actor != ACTOR_EXPERT:
            continue
        assert s.observation is not None
        out.append(Sample(
            task=record.task, instruction=instruction, observation=s.observation,
            action=np.array(s.action, dtype=np.float64), actor=s.actor,
            episode_id=episode_id, step_index=s.index,
        ))
    return out


def collect_round(policy: PolicyActor, expert_for, cfg: CollabLearnConfig,
                  buffer: Buffer, seed_stream: np.random.SeedSequence,
                  episode_id_base: int = 0,
                  episode_sink=None) -> list[EpisodeRecord]:
    """Run collaboration episodes, cycling tasks round-robin, until the
    buffer is full. Only expert-actor samples enter the buffer; all episode
    records are returned (and optionally sunk to a log) regardless."""
    records: list[EpisodeRecord] = []
    if buffer.capacity == 0 or buffer.full:
        return records
    episode = 0
    while not buffer.full:
        if episode >= cfg.episode_cap:
            raise CollectionStalledError(
                f"buffer at {len(buffer)}/{buffer.capacity} after {episode} episodes")
        task: TaskSpec = TASKS[cfg.tasks[episode % len(cfg.tasks)]]
        seed = int(seed_stream.spawn(1)[0].generate_state(1)[0])
        record = run_episode(
            policy, expert_for(task), task, seed, cfg.arbiter,
            obs_mode=cfg.obs_mode, history_k=cfg.history_k,
            task_names=cfg.task_names,
        )
        records.append(record)
        if episode_sink is not None:
            episode_sink(episode_id_base + episode, record)
        for sample in harvest_expert_samples(record, episode_id_base + episode, cfg.task_names):
            if not buffer.add(sample):
                break
        episode += 1
    return records


@dataclass
class RoundMetrics:
    round_index: int
    episodes: int
    expert_steps: int
    mean_episode_steps: float
    collab_success_rate: float
    eval_success_rate: float | None = None

    def to_dict(self) -> dict:
        return {
            "round": self.round_index,
            "episodes": self.episodes,
            "expert_steps": self.expert_steps,
            "mean_episode_steps": self.mean_episode_steps,
            "collab_success_rate": self.collab_success_rate,
            "eval_success_rate": self.eval_success_rate,
        }


def run(params: PolicyParams, stats: NormStats, expert_for, cfg: CollabLearnConfig,
        bootstrap: Dataset | None = None,
        evaluator=None, episode_sink=None) -> tuple[PolicyParams, list[RoundMetrics]]:
    """Collaborate, harvest, re-tune; repeat for cfg.rounds rounds.

    Each round's batches mix collaboration data 50/50 with the bootstrap
    demos when provided, guarding against forgetting the original skills.
    `evaluator(params) -> float` supplies the per-round policy-only probe.
    """
    dataset = Dataset()
    metrics: list[RoundMetrics] = []
    seeds = np.random.SeedSequence(cfg.seed)
    current = params
    episode_id_base = 0

    for rnd in range(cfg.rounds):
        buffer = Buffer(capacity=cfg.buffer_capacity)
        records = collect_round(
            PolicyActor(current, stats), expert_for, cfg, buffer,
            seeds.spawn(1)[0], episode_id_base=episode_id_base,
            episode_sink=episode_sink,
        )
        episode_id_base += len(records)
        harvested = buffer.flush_into(dataset)
        assert len(buffer) == 0

        round_train = TrainConfig(
            steps=cfg.train.steps, batch_size=cfg.train.batch_size,
            learning_rate=cfg.train.learning_rate, momentum=cfg.train.momentum,
            seed=cfg.train.seed + rnd, augment=cfg.train.augment,
            raster_mode=cfg.train.raster_mode,
        )
        current = fit(current, dataset, stats, round_train, mix_dataset=bootstrap)

        succ = [r.success for r in records]
        metrics.append(RoundMetrics(
            round_index=rnd,
            episodes=len(records),
            expert_steps=harvested,
            mean_episode_steps=float(np.mean([r.total_steps for r in records])) if records else 0.0,
            collab_success_rate=float(np.mean(succ)) if succ else 0.0,
            eval_success_rate=evaluator(current) if evaluator is not None else None,
        ))
    return current, metrics
