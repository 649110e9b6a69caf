"""The operator pipeline behind the CLI subcommands: demo collection,
bootstrap cloning, benchmark sweeps, collaboration rounds, and the slow-
expert timing comparison. Everything is a pure function of (config, seeds)
so a stage re-run from its manifest reproduces its outputs byte for byte."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .arbiter import (
    MODE_COLLAB,
    MODE_EXPERT_ONLY,
    MODE_POLICY_ONLY,
    ArbiterConfig,
    run_episode,
)
from .bci import BciExpert
from .bench import BenchmarkSuite, ResultTable, export_csv, export_summary, run_benchmark
from .config import RunConfig
from .env import TASKS, TaskSpec
from .expert import ScriptedController, scripted_expert
from .learnloop import CollabLearnConfig, harvest_expert_samples, run as collab_run
from .obs import NormStats, compute_stats, obs_dim
from .policy import ArchSpec, PolicyActor, PolicyParams, init_params
from .train import Dataset, TrainConfig, fit, load_checkpoint, save_checkpoint
from . import trajlog


class _NeverPolicy:
    """Expert-only episodes must not consult the policy."""

    def act(self, instruction, observation):  # pragma: no cover
        raise AssertionError("policy consulted during an expert-only episode")


def demo_seed(cfg: RunConfig, task_index: int, trial: int) -> int:
    ss = np.random.SeedSequence(entropy=cfg.demo_seed, spawn_key=(task_index, trial))
    return int(ss.generate_state(1)[0])


def collect_demos(cfg: RunConfig, log_fh=None) -> Dataset:
    """Expert-only trajectories, demos_per_task per task, harvested into the
    bootstrap dataset."""
    dataset = Dataset()
    expert_cfg = ArbiterConfig(mode=MODE_EXPERT_ONLY)
    episode = 0
    for ti, name in enumerate(cfg.tasks):
        task = TASKS[name]
        for trial in range(cfg.demos_per_task):
            record = run_episode(
                _NeverPolicy(), scripted_expert(task, cfg.expert_gain), task,
                demo_seed(cfg, ti, trial), expert_cfg,
                obs_mode=cfg.obs_mode, history_k=cfg.history_k, task_names=cfg.tasks,
            )
            if log_fh is not None:
                trajlog.write_episode(log_fh, "demo-collect", episode, record)
            dataset.extend(harvest_expert_samples(record, episode, cfg.tasks))
            episode += 1
    return dataset


def arch_for(cfg: RunConfig) -> ArchSpec:
    input_dim = len(cfg.tasks) + obs_dim(cfg.obs_mode) * cfg.history_k
    return ArchSpec(input_dim=input_dim, hidden=cfg.hidden, head=cfg.head,
                    vocab_size=cfg.vocab_size)


def bootstrap_train(cfg: RunConfig, demos: Dataset) -> tuple[PolicyParams, NormStats]:
    stats = compute_stats(demos.actions())
    params = init_params(arch_for(cfg), cfg.init_seed)
    tc = TrainConfig(
        steps=cfg.bootstrap_steps, batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate, momentum=cfg.momentum,
        seed=cfg.train_seed, augment=cfg.augment,
        raster_mode=cfg.obs_mode == "raster",
    )
    return fit(params, demos, stats, tc), stats


def checkpoint_metadata(cfg: RunConfig) -> dict:
    return {
        "tasks": list(cfg.tasks),
        "obs_mode": cfg.obs_mode,
        "history_k": cfg.history_k,
        "provenance": "bootstrap",
        "demo_seed": cfg.demo_seed,
        "train_seed": cfg.train_seed,
        "bootstrap_steps": cfg.bootstrap_steps,
    }


def suite_for(cfg: RunConfig) -> BenchmarkSuite:
    suite = BenchmarkSuite(tasks=cfg.tasks, trials=cfg.trials, seed_base=cfg.suite_seed)
    return suite.fast() if cfg.fast else suite


def expert_factory(cfg: RunConfig):
    """Per-task expert constructor for non-interactive expert kinds."""
    if cfg.expert_kind == "scripted":
        return lambda task: scripted_expert(task, cfg.expert_gain)
    if cfg.expert_kind == "bci-sim":
        def make(task: TaskSpec) -> BciExpert:
            return BciExpert(
                scripted_expert(task, cfg.expert_gain),
                seed=cfg.bci_seed, noise_std=cfg.bci_noise_std,
                latency_ticks=cfg.bci_latency_ticks, margin_threshold=cfg.bci_margin,
            )
        return make
    raise ValueError(f"expert kind {cfg.expert_kind!r} needs an interactive session")


SWEEP_NS = (32, 16, 8, 4, 2, 1)


def sweep_settings(cfg: RunConfig) -> list[ArbiterConfig]:
    settings = [ArbiterConfig(mode=MODE_POLICY_ONLY)]
    settings += [ArbiterConfig(mode=MODE_COLLAB, n=n) for n in SWEEP_NS]
    settings.append(ArbiterConfig(mode=MODE_EXPERT_ONLY))
    return settings


def evaluate(cfg: RunConfig, actor: PolicyActor, settings=None, log_fh=None) -> ResultTable:
    suite = suite_for(cfg)
    sink = None
    if log_fh is not None:
        def sink(index, label, record):
            trajlog.write_episode(log_fh, f"eval:{label}", index, record)
    return run_benchmark(
        actor, expert_factory(cfg), suite, settings or sweep_settings(cfg),
        obs_mode=cfg.obs_mode, history_k=cfg.history_k, episode_sink=sink,
        task_names=cfg.tasks,
    )


def policy_only_success(cfg: RunConfig, actor: PolicyActor) -> float:
    table = evaluate(cfg, actor, settings=[ArbiterConfig(mode=MODE_POLICY_ONLY)])
    return table.aggregate(MODE_POLICY_ONLY)["success_rate"]


def collab_rounds(cfg: RunConfig, params: PolicyParams, stats: NormStats,
                  bootstrap: Dataset, log_fh=None, evaluator=None):
    learn_cfg = CollabLearnConfig(
        rounds=cfg.rounds, buffer_capacity=cfg.buffer_capacity,
        train=TrainConfig(
            steps=cfg.train_steps, batch_size=cfg.batch_size,
            learning_rate=cfg.learning_rate, momentum=cfg.momentum,
            seed=cfg.train_seed, augment=cfg.augment,
            raster_mode=cfg.obs_mode == "raster",
        ),
        tasks=cfg.tasks, arbiter=ArbiterConfig(mode=MODE_COLLAB, n=cfg.arbiter_n),
        seed=cfg.collab_seed, obs_mode=cfg.obs_mode, history_k=cfg.history_k,
        instruction_names=cfg.tasks,
    )
    sink = None
    if log_fh is not None:
        def sink(index, record):
            trajlog.write_episode(log_fh, "collab", index, record)
    return collab_run(params, stats, expert_factory(cfg), learn_cfg,
                      bootstrap=bootstrap, evaluator=evaluator, episode_sink=sink)


BCI_TASKS = ("window open", "drawer close", "button press", "door open")


def bci_timing_comparison(cfg: RunConfig, actor: PolicyActor, n: int = 16,
                          seeds_per_task: int = 5, log_fh=None) -> dict:
    """Collaboration at N:1 with the slow simulated-BCI expert versus pure
    slow-expert control, tick-accounted, on the four slider/button tasks."""
    make_expert = expert_factory(RunConfig(**{**cfg.__dict__, "expert_kind": "bci-sim"}))
    out: dict = {"n": n, "latency_ticks": cfg.bci_latency_ticks, "tasks": {}}
    episode = 0
    for name in BCI_TASKS:
        task = TASKS[name]
        suite = BenchmarkSuite(tasks=(name,), trials=seeds_per_task, seed_base=cfg.suite_seed)
        rows = {"collab": [], "pure": []}
        for label, mode_cfg in (
            ("collab", ArbiterConfig(mode=MODE_COLLAB, n=n)),
            ("pure", ArbiterConfig(mode=MODE_EXPERT_ONLY)),
        ):
            for seed in suite.seeds_for(name):
                record = run_episode(actor, make_expert(task), task, seed, mode_cfg,
                                     obs_mode=cfg.obs_mode, history_k=cfg.history_k,
                                     task_names=cfg.tasks)
                if log_fh is not None:
                    trajlog.write_episode(log_fh, f"bci:{label}", episode, record)
                episode += 1
                rows[label].append(record)
        out["tasks"][name] = {
            "collab_success": sum(r.success for r in rows["collab"]) / seeds_per_task,
            "pure_success": sum(r.success for r in rows["pure"]) / seeds_per_task,
            "collab_mean_steps": float(np.mean([r.total_steps for r in rows["collab"]])),
            "pure_mean_steps": float(np.mean([r.total_steps for r in rows["pure"]])),
            "collab_mean_ticks": float(np.mean([r.ticks for r in rows["collab"]])),
            "pure_mean_ticks": float(np.mean([r.ticks for r in rows["pure"]])),
        }
    ratios = [t["collab_mean_ticks"] / t["pure_mean_ticks"] for t in out["tasks"].values()]
    out["mean_tick_ratio"] = float(np.mean(ratios))
    return out


def save_report(out_dir: Path, name: str, table: ResultTable, extra: dict | None = None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{name}.csv").write_text(export_csv(table))
    (out_dir / f"{name}.json").write_text(export_summary(table, extra))


def save_json(out_dir: Path, name: str, doc: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{name}.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
