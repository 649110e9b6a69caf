"""Operator entry points. One binary, subcommand per pipeline stage; every
run validates its config first, locks its output directory, and writes a
manifest sufficient to reproduce it."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import pipeline
from .arbiter import MODE_POLICY_ONLY, ArbiterConfig
from .bench import export_summary, learning_curve, parse_csv
from .config import ConfigError, OutputDirLock, RunConfig, load_config, write_manifest
from .learnloop import CollectionStalledError
from .obs import NormStats
from .policy import PolicyActor, PolicyParams
from .train import (
    CheckpointError,
    DivergenceError,
    load_checkpoint,
    require_head,
    save_checkpoint,
)

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _fail(error_class: str, message: str) -> None:
    click.echo(f"error:{error_class}: {message}", err=True)
    sys.exit(EXIT_CONFIG if error_class == "config-error" else EXIT_RUNTIME)


def _load(ctx) -> RunConfig:
    try:
        return load_config(ctx.obj.get("config_path"), ctx.obj.get("overrides", {}))
    except ConfigError as e:
        _fail("config-error", str(e))


_shared_options = [
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="TOML config file; flags override its keys."),
    click.option("--out-dir", default=None, help="Output directory."),
    click.option("--tasks", default=None, help="Comma-separated task subset."),
    click.option("--trials", type=int, default=None),
    click.option("--fast/--no-fast", default=None,
                 help="Use the documented 10-seed prefix of the suite."),
    click.option("--head", type=click.Choice(["discrete", "continuous"]), default=None),
    click.option("--obs-mode", type=click.Choice(["state-vector", "raster"]), default=None),
    click.option("--history-k", type=int, default=None),
    click.option("--arbiter-n", type=int, default=None),
    click.option("--rounds", type=int, default=None),
    click.option("--expert-kind", type=click.Choice(["scripted", "bci-sim", "human"]), default=None),
    click.option("--checkpoint", default=None),
    click.option("--train-steps", type=int, default=None),
    click.option("--bootstrap-steps", type=int, default=None),
    click.option("--port", type=int, default=None),
]


def shared_options(fn):
    for opt in reversed(_shared_options):
        fn = opt(fn)
    return fn


def _collect_overrides(kwargs: dict) -> dict:
    overrides = {k: v for k, v in kwargs.items() if v is not None and k != "config_path"}
    if "tasks" in overrides:
        overrides["tasks"] = tuple(t.strip() for t in overrides["tasks"].split(","))
    return overrides


@click.group(context_settings={"auto_envvar_prefix": "COLLABARM"})
@click.pass_context
def main(ctx):
    """Collaborated manipulation and learning on the planar ten-task bench."""
    ctx.ensure_object(dict)


def _command(name):
    def deco(fn):
        @main.command(name=name)
        @shared_options
        @click.pass_context
        def wrapper(ctx, config_path, **kwargs):
            ctx.obj["config_path"] = config_path
            ctx.obj["overrides"] = _collect_overrides(kwargs)
            cfg = _load(ctx)
            out_dir = Path(cfg.out_dir)
            try:
                with OutputDirLock(out_dir):
                    fn(cfg, out_dir)
            except ConfigError as e:
                _fail("config-error", str(e))
            except CheckpointError as e:
                _fail("checkpoint-error", str(e))
            except DivergenceError as e:
                _fail("divergence", str(e))
            except CollectionStalledError as e:
                _fail("collection-stalled", str(e))
            except FileNotFoundError as e:
                _fail("missing-input", str(e))
        wrapper.__name__ = fn.__name__
        wrapper.help = fn.__doc__
        return wrapper
    return deco


def _demo_seed_lists(cfg: RunConfig) -> dict:
    return {
        "demo": [pipeline.demo_seed(cfg, ti, t)
                 for ti in range(len(cfg.tasks)) for t in range(cfg.demos_per_task)],
    }


def _suite_seed_lists(cfg: RunConfig) -> dict:
    suite = pipeline.suite_for(cfg)
    return {"suite": {t: suite.seeds_for(t) for t in suite.tasks}}


@_command("demo-collect")
def demo_collect(cfg: RunConfig, out_dir: Path) -> None:
    """Collect scripted-expert demonstrations per task."""
    write_manifest(cfg, out_dir, "demo-collect", _demo_seed_lists(cfg))
    with open(out_dir / "demos.jsonl", "w") as fh:
        demos = pipeline.collect_demos(cfg, log_fh=fh)
    click.echo(f"collected {len(demos)} expert-step samples "
               f"({cfg.demos_per_task}/task) -> {out_dir / 'demos.jsonl'}")


@_command("train")
def train_cmd(cfg: RunConfig, out_dir: Path) -> None:
    """Behavior-clone the demos into a policy checkpoint."""
    write_manifest(cfg, out_dir, "train", _demo_seed_lists(cfg))
    demos = pipeline.collect_demos(cfg)
    params, stats = pipeline.bootstrap_train(cfg, demos)
    path = cfg.checkpoint_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(path, params, stats, pipeline.checkpoint_metadata(cfg))
    click.echo(f"trained on {len(demos)} samples for {cfg.bootstrap_steps} steps -> {path}")


def _load_actor(cfg: RunConfig) -> tuple[PolicyParams, NormStats, dict, PolicyActor]:
    params, stats, meta = load_checkpoint(cfg.checkpoint_path())
    require_head(meta, cfg.head)
    return params, stats, meta, PolicyActor(params, stats)


@_command("eval")
def eval_cmd(cfg: RunConfig, out_dir: Path) -> None:
    """Run the benchmark sweep and emit the result table."""
    write_manifest(cfg, out_dir, "eval", _suite_seed_lists(cfg))
    *_, actor = _load_actor(cfg)
    with open(out_dir / "eval-trajectories.jsonl", "w") as fh:
        table = pipeline.evaluate(cfg, actor, log_fh=fh)
    pipeline.save_report(out_dir, "eval-report", table)
    agg = {s: table.aggregate(s)["success_rate"] for s in table.settings()}
    for setting, rate in agg.items():
        click.echo(f"{setting}: success {rate:.3f}")


@_command("collab")
def collab_cmd(cfg: RunConfig, out_dir: Path) -> None:
    """Run the collaboration learning loop for the configured rounds."""
    write_manifest(cfg, out_dir, "collab", _suite_seed_lists(cfg))
    params, stats, meta, actor = _load_actor(cfg)
    demos = pipeline.collect_demos(cfg)
    evaluator = lambda p: pipeline.policy_only_success(cfg, PolicyActor(p, stats))
    with open(out_dir / "collab-trajectories.jsonl", "w") as fh:
        tuned, metrics = pipeline.collab_rounds(cfg, params, stats, demos,
                                                log_fh=fh, evaluator=evaluator)
    tuned_path = out_dir / "policy-tuned.ckpt"
    meta = dict(meta)
    meta["provenance"] = "collab-retune"
    save_checkpoint(tuned_path, tuned, stats, meta)
    pipeline.save_json(out_dir, "collab-metrics", {"rounds": [m.to_dict() for m in metrics]})
    for m in metrics:
        click.echo(f"round {m.round_index}: collab success {m.collab_success_rate:.3f} "
                   f"-> policy-only {m.eval_success_rate:.3f}")
    click.echo(f"re-tuned checkpoint -> {tuned_path}")


@_command("bci-sim")
def bci_sim_cmd(cfg: RunConfig, out_dir: Path) -> None:
    """Collaborate with the synthetic SSVEP expert; emit the timing report."""
    write_manifest(cfg, out_dir, "bci-sim", _suite_seed_lists(cfg))
    *_, actor = _load_actor(cfg)
    with open(out_dir / "bci-trajectories.jsonl", "w") as fh:
        report = pipeline.bci_timing_comparison(cfg, actor, n=cfg.bci_n, log_fh=fh)
    pipeline.save_json(out_dir, "bci-report", report)
    for task, row in report["tasks"].items():
        click.echo(f"{task}: collab {row['collab_mean_ticks']:.0f} ticks "
                   f"vs pure {row['pure_mean_ticks']:.0f} ticks")
    click.echo(f"mean tick ratio: {report['mean_tick_ratio']:.3f}")


@_command("report")
def report_cmd(cfg: RunConfig, out_dir: Path) -> None:
    """Recompute tables and curves from previously written logs."""
    eval_csv = out_dir / "eval-report.csv"
    if eval_csv.exists():
        table = parse_csv(eval_csv.read_text())
        (out_dir / "eval-report.rebuilt.json").write_text(export_summary(table))
        click.echo(f"rebuilt {out_dir / 'eval-report.rebuilt.json'}")
    metrics_path = out_dir / "collab-metrics.json"
    if metrics_path.exists():
        import json
        doc = json.loads(metrics_path.read_text())
        if len(doc["rounds"]) >= 2:
            curve = learning_curve(doc["rounds"])
            pipeline.save_json(out_dir, "learning-curve", curve)
            click.echo(f"pearson success-vs-round: {curve['pearson_success_vs_round']:.4f}")
    if not eval_csv.exists() and not metrics_path.exists():
        raise FileNotFoundError(f"no logs found under {out_dir}")


@_command("serve")
def serve_cmd(cfg: RunConfig, out_dir: Path) -> None:
    """Start the human-expert session service."""
    import uvicorn

    from .server import build_app

    write_manifest(cfg, out_dir, "serve", {})
    app = build_app(cfg)
    click.echo(f"session service on ws://{cfg.host}:{cfg.port}/session")
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")


if __name__ == "__main__":
    main()
