"""The trainable policy: a small MLP over (instruction ++ stacked observation)
with either a per-dimension discrete-token action head or a continuous
regression head.

Token indexing is linear over the action interval: token 0 maps to the lower
action bound, token vocab_size-1 to the upper bound, and detokenization is
a = token / (vocab_size - 1) * (a_max - a_min) + a_min.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .env import ACTION_MAX, ACTION_MIN, Action
from .obs import HEAD_CONTINUOUS, HEAD_DISCRETE, NormStats, denormalize_action
from .util import count_warning

ACTION_DIMS = 3
DEFAULT_HIDDEN = (128, 128)
DEFAULT_VOCAB = 256


class ShapeError(ValueError):
    """Input or parameter shapes are inconsistent."""


@dataclass(frozen=True)
class ArchSpec:
    """Architecture descriptor, serialized into checkpoints."""

    input_dim: int
    hidden: tuple[int, ...] = DEFAULT_HIDDEN
    head: str = HEAD_DISCRETE
    vocab_size: int = DEFAULT_VOCAB
    action_dims: int = ACTION_DIMS

    @property
    def output_dim(self) -> int:
        if self.head == HEAD_DISCRETE:
            return self.action_dims * self.vocab_size
        return self.action_dims

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden, self.output_dim)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim, "hidden": list(self.hidden),
            "head": self.head, "vocab_size": self.vocab_size,
            "action_dims": self.action_dims,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArchSpec":
        return cls(
            input_dim=int(d["input_dim"]), hidden=tuple(int(h) for h in d["hidden"]),
            head=str(d["head"]), vocab_size=int(d["vocab_size"]),
            action_dims=int(d["action_dims"]),
        )


@dataclass
class PolicyParams:
    """Weights and biases, 64-bit floats throughout. Treated as immutable
    during an episode; training returns a fresh copy."""

    arch: ArchSpec
    weights: list[np.ndarray] = field(default_factory=list)
    biases: list[np.ndarray] = field(default_factory=list)

    def copy(self) -> "PolicyParams":
        return PolicyParams(
            arch=self.arch,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )

    def flat(self) -> np.ndarray:
        return np.concatenate([a.reshape(-1) for pair in zip(self.weights, self.biases) for a in pair])


def init_params(arch: ArchSpec, seed: int) -> PolicyParams:
    """Seeded Gaussian init, scaled by fan-in."""
    rng = np.random.Generator(np.random.PCG64(seed))
    dims = arch.layer_dims
    weights, biases = [], []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.normal(0.0, 1.0 / np.sqrt(d_in), size=(d_in, d_out)))
        biases.append(np.zeros(d_out, dtype=np.float64))
    return PolicyParams(arch=arch, weights=weights, biases=biases)


def _check_input(params: PolicyParams, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    expected = params.arch.input_dim
    if x.shape[1] != expected:
        raise ShapeError(
            f"input layer expects dim {expected}, got {x.shape[1]}")
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        if w.shape[1] != b.shape[0]:
            raise ShapeError(f"layer {i}: weight {w.shape} vs bias {b.shape}")
    return x


def forward(params: PolicyParams, x: np.ndarray) -> np.ndarray:
    """Batched forward pass. tanh on hidden layers, identity output.

    Discrete head returns logits shaped (batch, action_dims, vocab_size);
    continuous head returns normalized actions (batch, action_dims). A 1-D
    input drops the batch axis in the result.
    """
    squeeze = np.asarray(x).ndim == 1
    h = _check_input(params, x)
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w + b
        if i != last:
            h = np.tanh(h)
    arch = params.arch
    if arch.head == HEAD_DISCRETE:
        h = h.reshape(-1, arch.action_dims, arch.vocab_size)
    if squeeze:
        h = h[0]
    return h


def detokenize(token: int, vocab_size: int = DEFAULT_VOCAB,
               a_min: float = ACTION_MIN, a_max: float = ACTION_MAX) -> float:
    """Map a token index back onto the continuous action interval."""
    if a_max <= a_min:
        raise ValueError("a_max must exceed a_min")
    if not 0 <= token < vocab_size:
        raise ValueError(f"token {token} outside vocabulary of {vocab_size}")
    return token / (vocab_size - 1) * (a_max - a_min) + a_min


def tokenize(value: float, vocab_size: int = DEFAULT_VOCAB,
             a_min: float = ACTION_MIN, a_max: float = ACTION_MAX) -> int:
    """Nearest-bin token for a continuous action component. Out-of-bounds
    values are clamped (counted, not fatal)."""
    if a_max <= a_min:
        raise ValueError("a_max must exceed a_min")
    if value < a_min or value > a_max:
        count_warning("tokenize.out_of_bounds")
        value = min(max(value, a_min), a_max)
    return int(round((value - a_min) / (a_max - a_min) * (vocab_size - 1)))


def tokenize_array(actions: np.ndarray, vocab_size: int = DEFAULT_VOCAB,
                   a_min: float = ACTION_MIN, a_max: float = ACTION_MAX) -> np.ndarray:
    """Vectorized tokenize over an (..., action_dims) array."""
    a = np.asarray(actions, dtype=np.float64)
    if np.any(a < a_min) or np.any(a > a_max):
        count_warning("tokenize.out_of_bounds")
        a = np.clip(a, a_min, a_max)
    return np.rint((a - a_min) / (a_max - a_min) * (vocab_size - 1)).astype(np.int64)


def act(params: PolicyParams, instruction: np.ndarray, observation: np.ndarray,
        stats: NormStats) -> Action:
    """Greedy action for one (instruction, observation) pair.

    Discrete head: per-dimension argmax over logits, then detokenize.
    Continuous head: denormalize the regression output. Components are
    clamped to the action bounds either way.
    """
    x = np.concatenate([np.asarray(instruction, dtype=np.float64),
                        np.asarray(observation, dtype=np.float64)])
    out = forward(params, x)
    arch = params.arch
    if arch.head == HEAD_DISCRETE:
        tokens = np.argmax(out, axis=-1)
        vals = [detokenize(int(t), arch.vocab_size) for t in tokens]
    else:
        vals = denormalize_action(out, stats, HEAD_CONTINUOUS).tolist()
    c = lambda v: min(max(float(v), ACTION_MIN), ACTION_MAX)
    return Action(c(vals[0]), c(vals[1]), c(vals[2]))


class PolicyActor:
    """Bundles frozen params and stats behind the act() call used by episode
    runners. A snapshot is taken so concurrent training cannot mutate it."""

    def __init__(self, params: PolicyParams, stats: NormStats):
        self._params = params.copy()
        self._stats = stats

    @property
    def arch(self) -> ArchSpec:
        return self._params.arch

    def act(self, instruction: np.ndarray, observation: np.ndarray) -> Action:
        return act(self._params, instruction, observation, self._stats)
