"""Trajectory logs: one JSON record per step, append-only, with the field
order (run, episode, step, task, seed, actor, action, success). Reports are
re-derivable from these files alone."""

from __future__ import annotations

import json
from typing import IO, Iterable, Iterator

from .arbiter import EpisodeRecord

LOG_FIELDS = ("run", "episode", "step", "task", "seed", "actor", "action", "success")


def write_episode(fh: IO[str], run_id: str, episode_index: int, record: EpisodeRecord) -> None:
    for s in record.steps:
        row = {
            "run": run_id,
            "episode": episode_index,
            "step": s.index,
            "task": record.task,
            "seed": record.seed,
            "actor": s.actor,
            "action": list(s.action),
            "success": s.success,
        }
        fh.write(json.dumps(row) + "\n")


def read_steps(fh: IO[str]) -> Iterator[dict]:
    for line in fh:
        line = line.strip()
        if line:
            yield json.loads(line)


def episodes(rows: Iterable[dict]) -> Iterator[list[dict]]:
    """Group step rows back into episodes (run, episode) in file order."""
    current: list[dict] = []
    key = None
    for row in rows:
        k = (row["run"], row["episode"])
        if key is not None and k != key:
            yield current
            current = []
        key = k
        current.append(row)
    if current:
        yield current


def audit_schedule(episode_rows: list[dict], n: int) -> bool:
    """Check actor(i) == expert exactly when i % (n+1) == 0, counting from 1."""
    return all(
        (row["actor"] == "expert") == (row["step"] % (n + 1) == 0)
        for row in episode_rows
    )
