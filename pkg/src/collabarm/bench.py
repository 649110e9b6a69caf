"""Seeded benchmark harness: fixed trials per task with one shared seed list
across every compared setting, ratio sweeps, workload accounting, and
round-over-round learning statistics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .arbiter import ArbiterConfig, EpisodeRecord, run_episode
from .env import TASK_NAMES, TASKS

FAST_TRIALS = 10


@dataclass(frozen=True)
class BenchmarkSuite:
    tasks: tuple[str, ...] = tuple(TASKS)
    trials: int = 50
    seed_base: int = 1000

    def seeds_for(self, task: str) -> list[int]:
        """The shared seed list: a fixed function of (suite, task, trial), so
        every setting replays identical initializations. A fast run is a
        prefix of the full run."""
        idx = self.tasks.index(task)
        out = []
        for trial in range(self.trials):
            ss = np.random.SeedSequence(entropy=self.seed_base, spawn_key=(idx, trial))
            out.append(int(ss.generate_state(1)[0]))
        return out

    def fast(self) -> "BenchmarkSuite":
        return BenchmarkSuite(tasks=self.tasks, trials=min(self.trials, FAST_TRIALS),
                              seed_base=self.seed_base)


@dataclass
class CellStats:
    """Aggregates for one (setting, task) cell."""

    episodes: int = 0
    successes: int = 0
    steps_sum: int = 0
    steps_success_sum: int = 0
    expert_steps_sum: int = 0
    fraction_sum: float = 0.0
    ticks_sum: int = 0

    def add(self, record: EpisodeRecord) -> None:
        self.episodes += 1
        self.successes += int(record.success)
        self.steps_sum += record.total_steps
        if record.success:
            self.steps_success_sum += record.total_steps
        self.expert_steps_sum += record.expert_steps
        self.fraction_sum += record.expert_fraction()
        self.ticks_sum += record.ticks

    def row(self) -> dict:
        n = self.episodes
        return {
            "episodes": n,
            "success_rate": self.successes / n if n else None,
            "mean_steps": self.steps_sum / n if n else None,
            "mean_steps_success": self.steps_success_sum / self.successes if self.successes else None,
            "mean_expert_steps": self.expert_steps_sum / n if n else None,
            "mean_expert_fraction": self.fraction_sum / n if n else None,
            "mean_ticks": self.ticks_sum / n if n else None,
        }


@dataclass
class ResultTable:
    """Per (setting, task) metrics plus an aggregate row per setting."""

    suite_tasks: tuple[str, ...]
    trials: int
    cells: dict[tuple[str, str], dict] = field(default_factory=dict)

    def aggregate(self, setting: str) -> dict:
        rows = [self.cells[(setting, t)] for t in self.suite_tasks if (setting, t) in self.cells]
        if not rows:
            return {}
        keys = ("success_rate", "mean_steps", "mean_expert_steps",
                "mean_expert_fraction", "mean_ticks")
        return {k: float(np.mean([r[k] for r in rows if r[k] is not None])) for k in keys}

    def settings(self) -> list[str]:
        seen: list[str] = []
        for setting, _ in self.cells:
            if setting not in seen:
                seen.append(setting)
        return seen


def run_benchmark(policy, expert_for, suite: BenchmarkSuite,
                  settings: list[ArbiterConfig], obs_mode: str = "state-vector",
                  history_k: int = 1, episode_sink=None,
                  task_names: tuple[str, ...] = TASK_NAMES) -> ResultTable:
    """One row per (setting, task), deterministic given the suite: settings
    and tasks run in declared order, trials in seed-list order."""
    table = ResultTable(suite_tasks=suite.tasks, trials=suite.trials)
    episode_index = 0
    for cfg in settings:
        label = cfg.label()
        for task_name in suite.tasks:
            task = TASKS[task_name]
            stats = CellStats()
            for seed in suite.seeds_for(task_name):
                record = run_episode(
                    policy, expert_for(task), task, seed, cfg,
                    obs_mode=obs_mode, history_k=history_k, task_names=task_names,
                )
                stats.add(record)
                if episode_sink is not None:
                    episode_sink(episode_index, label, record)
                episode_index += 1
            table.cells[(label, task_name)] = stats.row()
    return table


def workload_reduction(table: ResultTable, collab_setting: str,
                       expert_setting: str = "expert-only") -> float:
    """1 - mean(collab expert steps) / mean(expert-only steps), over the
    shared suite."""
    collab = table.aggregate(collab_setting)
    solo = table.aggregate(expert_setting)
    if not collab or not solo:
        raise ValueError("both settings must be present in the table")
    return 1.0 - collab["mean_expert_steps"] / solo["mean_expert_steps"]


def pearson(xs, ys) -> float:
    """Plain Pearson correlation; NaN (with a recorded reason) when either
    series has zero variance."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise ValueError("need two equal-length series of length >= 2")
    xd = x - x.mean()
    yd = y - y.mean()
    denom = math.sqrt(float(xd @ xd) * float(yd @ yd))
    if denom == 0.0:
        return float("nan")
    return float(xd @ yd) / denom


def learning_curve(round_metrics: list[dict]) -> dict:
    """Per-round means plus Pearson correlations of success-vs-round and
    expert-steps-vs-round (the bi-directional learning report)."""
    if len(round_metrics) < 2:
        raise ValueError("learning curve needs at least two rounds")
    rounds = [m["round"] for m in round_metrics]
    succ = [m["collab_success_rate"] for m in round_metrics]
    steps = [m["expert_steps_per_episode"] if "expert_steps_per_episode" in m
             else m["expert_steps"] / max(m["episodes"], 1) for m in round_metrics]
    r_succ = pearson(rounds, succ)
    r_steps = pearson(rounds, steps)
    return {
        "rounds": rounds,
        "success_rates": succ,
        "expert_steps_per_episode": steps,
        "pearson_success_vs_round": r_succ,
        "pearson_steps_vs_round": r_steps,
        "diagnostics": {
            "success_constant": math.isnan(r_succ),
            "steps_constant": math.isnan(r_steps),
        },
    }


CSV_COLUMNS = ("setting", "task", "episodes", "success_rate", "mean_steps",
               "mean_steps_success", "mean_expert_steps", "mean_expert_fraction",
               "mean_ticks")


def _fmt(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def export_csv(table: ResultTable) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for setting in table.settings():
        for task in table.suite_tasks:
            row = table.cells.get((setting, task))
            if row is None:
                lines.append(",".join([setting, task] + ["null"] * (len(CSV_COLUMNS) - 2)))
                continue
            lines.append(",".join([setting, task] + [_fmt(row[c]) for c in CSV_COLUMNS[2:]]))
        agg = table.aggregate(setting)
        lines.append(",".join(
            [setting, "__aggregate__", str(table.trials * len(table.suite_tasks)),
             _fmt(agg.get("success_rate")), _fmt(agg.get("mean_steps")), "null",
             _fmt(agg.get("mean_expert_steps")), _fmt(agg.get("mean_expert_fraction")),
             _fmt(agg.get("mean_ticks"))]))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> ResultTable:
    lines = [ln for ln in text.strip().split("\n") if ln]
    header = lines[0].split(",")
    assert tuple(header) == CSV_COLUMNS, "unexpected result table header"
    cells: dict[tuple[str, str], dict] = {}
    tasks: list[str] = []
    trials = 0
    for ln in lines[1:]:
        parts = ln.split(",")
        setting, task = parts[0], parts[1]
        if task == "__aggregate__":
            continue
        if task not in tasks:
            tasks.append(task)
        row = {}
        for key, raw in zip(CSV_COLUMNS[2:], parts[2:]):
            if raw == "null":
                row[key] = None
            elif key == "episodes":
                row[key] = int(raw)
                trials = max(trials, int(raw))
            else:
                row[key] = float(raw)
        cells[(setting, task)] = row
    return ResultTable(suite_tasks=tuple(tasks), trials=trials, cells=cells)


def export_summary(table: ResultTable, extra: dict | None = None) -> str:
    doc = {
        "tasks": list(table.suite_tasks),
        "trials": table.trials,
        "settings": {
            s: {"aggregate": table.aggregate(s),
                "per_task": {t: table.cells.get((s, t)) for t in table.suite_tasks}}
            for s in table.settings()
        },
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
