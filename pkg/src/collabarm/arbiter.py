"""The collaborated-manipulation scheduler: the policy acts for N steps, the
expert takes one, repeating until success or the step cap. Every step logs
which actor produced it; expert steps carry their observation so the learning
loop can harvest them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .env import FAILURE_THRESHOLD, TASK_NAMES, Action, TaskSpec, WorldState, reset, step
from .obs import HistoryStack, encode, instruction_onehot, obs_dim

MODE_COLLAB = "collab"
MODE_POLICY_ONLY = "policy-only"
MODE_EXPERT_ONLY = "expert-only"

ACTOR_POLICY = "policy"
ACTOR_EXPERT = "expert"


@dataclass(frozen=True)
class ArbiterConfig:
    mode: str = MODE_COLLAB
    n: int = 4                      # policy steps per expert step
    failure_threshold: int = FAILURE_THRESHOLD

    def __post_init__(self) -> None:
        if self.mode not in (MODE_COLLAB, MODE_POLICY_ONLY, MODE_EXPERT_ONLY):
            raise ValueError(f"unknown arbiter mode: {self.mode!r}")
        if self.n < 1:
            raise ValueError("N must be >= 1")

    def expert_turn(self, step_index: int) -> bool:
        """Steps count from 1; in collab mode the expert owns every
        (N+1)-th step, so it never acts first."""
        if self.mode == MODE_EXPERT_ONLY:
            return True
        if self.mode == MODE_POLICY_ONLY:
            return False
        return step_index % (self.n + 1) == 0

    def label(self) -> str:
        if self.mode == MODE_COLLAB:
            return f"N={self.n}"
        return self.mode


@dataclass
class EpisodeStep:
    index: int
    actor: str
    action: tuple[float, float, float]
    success: bool
    observation: np.ndarray | None = None   # stacked history at decision time


@dataclass
class EpisodeRecord:
    task: str
    seed: int
    steps: list[EpisodeStep] = field(default_factory=list)
    success: bool = False
    total_steps: int = 0
    expert_steps: int = 0
    ticks: int = 0

    def expert_fraction(self) -> float:
        if self.total_steps == 0:
            raise ValueError("empty episode record")
        return self.expert_steps / self.total_steps


def run_episode(policy, expert, task: TaskSpec, seed: int, cfg: ArbiterConfig,
                obs_mode: str = "state-vector", history_k: int = 1,
                keep_policy_obs: bool = False, frame_sink=None,
                task_names: tuple[str, ...] = TASK_NAMES) -> EpisodeRecord:
    """Run one seeded episode under the configured schedule.

    `policy` exposes act(instruction, stacked_obs) -> Action; `expert`
    exposes action(state) -> Action plus a latency_ticks attribute. Expert
    steps always keep their observation (buffer capture); policy steps do so
    only when asked.
    """
    record = EpisodeRecord(task=task.name, seed=seed)
    state: WorldState = reset(task, seed)
    instruction = instruction_onehot(task.name, task_names)
    history = HistoryStack(k=history_k, dim=obs_dim(obs_mode))
    if frame_sink is not None:
        frame_sink(state, 0, None, False)

    for i in range(1, cfg.failure_threshold + 1):
        history.push(encode(state, obs_mode))
        stacked = history.stacked()
        expert_turn = cfg.expert_turn(i)
        if expert_turn:
            action: Action = expert.action(state)
            record.ticks += getattr(expert, "latency_ticks", 1)
            record.expert_steps += 1
        else:
            action = policy.act(instruction, stacked)
            record.ticks += 1
        state, done, won = step(state, action)
        record.steps.append(EpisodeStep(
            index=i,
            actor=ACTOR_EXPERT if expert_turn else ACTOR_POLICY,
            action=action.as_tuple(),
            success=won,
            observation=stacked if (expert_turn or keep_policy_obs) else None,
        ))
        if frame_sink is not None:
            frame_sink(state, i, record.steps[-1], done)
        if done:
            record.success = won
            break
    record.total_steps = len(record.steps)
    return record


def expert_fraction(record: EpisodeRecord) -> float:
    return record.expert_fraction()
