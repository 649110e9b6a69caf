"""Observation encoding: state vector or raster, optional history stacking,
training-time raster augmentation, and action normalization statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .env import FAILURE_THRESHOLD, RASTER_SIZE, TASK_NAMES, WorldState, render_raster

STATE_VEC_DIM = 9
RASTER_DIM = RASTER_SIZE * RASTER_SIZE

MODE_STATE = "state-vector"
MODE_RASTER = "raster"

STD_FLOOR = 1e-6


def instruction_onehot(task_name: str, task_names: tuple[str, ...] = TASK_NAMES) -> np.ndarray:
    """One-hot task instruction over the bench's task list."""
    vec = np.zeros(len(task_names), dtype=np.float64)
    vec[task_names.index(task_name)] = 1.0
    return vec


def state_vector(state: WorldState) -> np.ndarray:
    return np.array(
        [
            state.gripper_pos[0],
            state.gripper_pos[1],
            1.0 if state.gripper_closed else 0.0,
            state.object_pos[0],
            state.object_pos[1],
            state.target_pos[0],
            state.target_pos[1],
            state.articulation,
            state.step_count / FAILURE_THRESHOLD,
        ],
        dtype=np.float64,
    )


def obs_dim(mode: str) -> int:
    if mode == MODE_STATE:
        return STATE_VEC_DIM
    if mode == MODE_RASTER:
        return RASTER_DIM
    raise ValueError(f"unknown observation mode: {mode!r}")


def encode(state: WorldState, mode: str) -> np.ndarray:
    if mode == MODE_STATE:
        return state_vector(state)
    if mode == MODE_RASTER:
        return render_raster(state).reshape(-1)
    raise ValueError(f"unknown observation mode: {mode!r}")


@dataclass
class HistoryStack:
    """Ring of the last k observations, zero-padded at episode start.

    stacked() is always k*obs_dim long; at step t it holds observations
    t-k+1..t with zeros in the slots before the episode began.
    """

    k: int
    dim: int
    _items: list[np.ndarray] = field(default_factory=list)

    def push(self, obs: np.ndarray) -> None:
        self._items.append(obs)
        if len(self._items) > self.k:
            self._items.pop(0)

    def __len__(self) -> int:
        return len(self._items)

    def stacked(self) -> np.ndarray:
        out = np.zeros(self.k * self.dim, dtype=np.float64)
        pad = self.k - len(self._items)
        for i, obs in enumerate(self._items):
            out[(pad + i) * self.dim:(pad + i + 1) * self.dim] = obs
        return out


def _bilinear_resize(img: np.ndarray, x0: float, y0: float, side: float, out_size: int) -> np.ndarray:
    """Sample an out_size x out_size grid over the crop window [x0, x0+side) x
    [y0, y0+side) of img, bilinear interpolation, edge-clamped."""
    n = img.shape[0]
    coords = (np.arange(out_size) + 0.5) * (side / out_size) - 0.5
    ys = y0 + coords
    xs = x0 + coords

    def gather(axis_coords: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        lo = np.floor(axis_coords).astype(int)
        frac = axis_coords - lo
        lo = np.clip(lo, 0, n - 1)
        hi = np.clip(lo + 1, 0, n - 1)
        return lo, hi, frac

    ylo, yhi, fy = gather(ys)
    xlo, xhi, fx = gather(xs)
    top = img[np.ix_(ylo, xlo)] * (1 - fx)[None, :] + img[np.ix_(ylo, xhi)] * fx[None, :]
    bot = img[np.ix_(yhi, xlo)] * (1 - fx)[None, :] + img[np.ix_(yhi, xhi)] * fx[None, :]
    return top * (1 - fy)[:, None] + bot * fy[:, None]


@dataclass(frozen=True)
class AugmentConfig:
    enabled: bool = True
    crop_fraction: float = 0.9
    brightness: float = 0.2       # multiplicative, +/- this fraction
    contrast: tuple[float, float] = (0.8, 1.2)


def augment(raster: np.ndarray, rng: np.random.Generator,
            cfg: AugmentConfig = AugmentConfig()) -> np.ndarray:
    """Random resized crop, brightness, and contrast jitter; identity when
    disabled; output clamped to [0, 1]."""
    if not cfg.enabled:
        return raster
    img = raster.reshape(RASTER_SIZE, RASTER_SIZE)
    side = cfg.crop_fraction * RASTER_SIZE
    max_off = RASTER_SIZE - side
    x0 = float(rng.uniform(0.0, max_off))
    y0 = float(rng.uniform(0.0, max_off))
    out = _bilinear_resize(img, x0, y0, side, RASTER_SIZE)
    b = 1.0 + float(rng.uniform(-cfg.brightness, cfg.brightness))
    c = float(rng.uniform(*cfg.contrast))
    out = (out * b - 0.5) * c + 0.5
    out = np.clip(out, 0.0, 1.0)
    return out.reshape(raster.shape)


class DegenerateStatsError(ValueError):
    """Raised for stats that cannot normalize (empty or single-sample data)."""


@dataclass(frozen=True)
class NormStats:
    """Per-action-dimension normalization constants.

    min/max feed the min-max path, mean/std the z-score path. Invariants:
    max > min and std >= STD_FLOOR per dimension.
    """

    min: np.ndarray
    max: np.ndarray
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self) -> None:
        if np.any(self.max <= self.min):
            raise DegenerateStatsError("max <= min in normalization stats")
        if np.any(self.std <= 0):
            raise DegenerateStatsError("non-positive std in normalization stats")

    def to_dict(self) -> dict:
        return {
            "min": self.min.tolist(), "max": self.max.tolist(),
            "mean": self.mean.tolist(), "std": self.std.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormStats":
        return cls(
            min=np.asarray(d["min"], dtype=np.float64),
            max=np.asarray(d["max"], dtype=np.float64),
            mean=np.asarray(d["mean"], dtype=np.float64),
            std=np.asarray(d["std"], dtype=np.float64),
        )


def compute_stats(actions: np.ndarray,
                  bounds: tuple[float, float] = (-1.0, 1.0)) -> NormStats:
    """Exact per-dimension min/max/mean/std over an (N, 3) action array.

    A dimension with no variation (a gripper channel that never toggles, say)
    cannot be min-max normalized from data; its min/max fall back to the
    action bounds and its std to the floor. A dataset without at least two
    samples is rejected outright.
    """
    actions = np.asarray(actions, dtype=np.float64)
    if actions.ndim != 2 or actions.shape[0] == 0:
        raise DegenerateStatsError("empty action dataset")
    if actions.shape[0] < 2:
        raise DegenerateStatsError(
            "single-sample dataset: every dimension has min == max")
    lo = actions.min(axis=0)
    hi = actions.max(axis=0)
    mean = actions.mean(axis=0)
    std = actions.std(axis=0)
    flat = hi <= lo
    lo = np.where(flat, bounds[0], lo)
    hi = np.where(flat, bounds[1], hi)
    std = np.maximum(std, STD_FLOOR)
    return NormStats(min=lo, max=hi, mean=mean, std=std)


HEAD_DISCRETE = "discrete"
HEAD_CONTINUOUS = "continuous"


def normalize_action(a: np.ndarray, stats: NormStats, head: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if head == HEAD_DISCRETE:
        return (a - stats.min) / (stats.max - stats.min)
    if head == HEAD_CONTINUOUS:
        return (a - stats.mean) / stats.std
    raise ValueError(f"unknown head: {head!r}")


def denormalize_action(v: np.ndarray, stats: NormStats, head: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if head == HEAD_DISCRETE:
        return v * (stats.max - stats.min) + stats.min
    if head == HEAD_CONTINUOUS:
        return v * stats.std + stats.mean
    raise ValueError(f"unknown head: {head!r}")
