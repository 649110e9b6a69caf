"""Run configuration: one TOML file mirrored by CLI flags and COLLABARM_*
environment variables, validated before any side effect, hashed into a
manifest that suffices to reproduce the run."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__
from .env import TASKS


class ConfigError(ValueError):
    """Invalid or missing configuration; nothing has been written."""


@dataclass(frozen=True)
class RunConfig:
    # suite
    tasks: tuple[str, ...] = tuple(TASKS)
    trials: int = 50
    suite_seed: int = 1000
    fast: bool = False
    # observations / policy
    obs_mode: str = "state-vector"
    history_k: int = 1
    head: str = "continuous"
    hidden: tuple[int, ...] = (128, 128)
    vocab_size: int = 256
    # demos / training
    demos_per_task: int = 50
    demo_seed: int = 777
    train_steps: int = 5000
    bootstrap_steps: int = 80000
    batch_size: int = 64
    learning_rate: float = 1e-3
    momentum: float = 0.9
    train_seed: int = 1
    init_seed: int = 0
    augment: bool = True
    # collaboration
    arbiter_n: int = 4
    rounds: int = 1
    buffer_capacity: int = 2000
    collab_seed: int = 100
    expert_kind: str = "scripted"   # scripted | bci-sim | human
    expert_gain: float = 1.0
    # bci
    bci_noise_std: float = 1.0
    bci_latency_ticks: int = 48
    bci_margin: float = 0.05
    bci_seed: int = 9
    bci_n: int = 16                 # interleave ratio for the slow-expert comparison
    # server
    host: str = "127.0.0.1"
    port: int = 8765
    turn_timeout_s: float = 30.0
    display_rate_hz: float = 10.0
    # paths
    out_dir: str = "runs/out"
    checkpoint: str = ""            # resolved against out_dir when empty

    def validate(self) -> "RunConfig":
        for t in self.tasks:
            if t not in TASKS:
                raise ConfigError(f"unknown task: {t!r}")
        if self.trials <= 0 or self.demos_per_task <= 0:
            raise ConfigError("trials and demos_per_task must be positive")
        if self.head not in ("discrete", "continuous"):
            raise ConfigError(f"head must be discrete or continuous, got {self.head!r}")
        if self.obs_mode not in ("state-vector", "raster"):
            raise ConfigError(f"unknown obs_mode: {self.obs_mode!r}")
        if self.history_k < 1:
            raise ConfigError("history_k must be >= 1")
        if self.arbiter_n < 1:
            raise ConfigError("arbiter_n must be >= 1")
        if self.expert_kind not in ("scripted", "bci-sim", "human"):
            raise ConfigError(f"unknown expert_kind: {self.expert_kind!r}")
        if self.rounds < 1 or self.buffer_capacity < 0:
            raise ConfigError("rounds must be >= 1 and buffer_capacity >= 0")
        return self

    def canonical_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def checkpoint_path(self) -> Path:
        if self.checkpoint:
            return Path(self.checkpoint)
        return Path(self.out_dir) / "policy.ckpt"


_TUPLE_FIELDS = {"tasks", "hidden"}


def load_config(path: str | os.PathLike | None = None, overrides: dict | None = None,
                env: dict | None = None) -> RunConfig:
    """Precedence: defaults < TOML file < COLLABARM_* env vars < flags."""
    values: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            values.update(tomllib.loads(p.read_text()))
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"config parse error: {e}") from e

    env = dict(os.environ if env is None else env)
    for key in RunConfig.__dataclass_fields__:
        env_key = "COLLABARM_" + key.upper()
        if env_key in env:
            values[key] = _coerce(key, env[env_key])

    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val

    unknown = set(values) - set(RunConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in _TUPLE_FIELDS:
        if key in values and not isinstance(values[key], tuple):
            values[key] = tuple(values[key])
    try:
        cfg = RunConfig(**values)
    except TypeError as e:
        raise ConfigError(str(e)) from e
    return cfg.validate()


def _coerce(key: str, raw: str):
    kind = RunConfig.__dataclass_fields__[key].type
    if key in _TUPLE_FIELDS:
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        return tuple(int(p) if p.lstrip("-").isdigit() else p for p in parts)
    if "bool" in kind:
        return raw.lower() in ("1", "true", "yes", "on")
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def write_manifest(cfg: RunConfig, out_dir: Path, command: str, seed_lists: dict[str, list[int]]) -> Path:
    """The reproduction record: config hash + full config + seeds + version."""
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {
        "command": command,
        "config": json.loads(cfg.canonical_json()),
        "config_sha256": cfg.digest(),
        "seed_lists": seed_lists,
        "version": __version__,
    }
    path = out_dir / f"manifest-{command}.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


class OutputDirLock:
    """Guards an output directory against concurrent runs."""

    def __init__(self, out_dir: Path):
        self._path = Path(out_dir) / ".lock"

    def __enter__(self):
        self._path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self._path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(
                f"output directory is locked by another run: {self._path}") from None
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        return self

    def __exit__(self, *exc):
        try:
            self._path.unlink()
        except FileNotFoundError:
            pass
        return False
