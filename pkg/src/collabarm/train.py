"""Supervised learning on demonstration data: behavior cloning for the
bootstrap fine-tune and the re-tune step of the collaboration loop.

Gradients are analytic (verified against central finite differences in the
test suite), the optimizer is SGD with momentum, and everything runs in
64-bit floats so those checks can be tight.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .obs import HEAD_CONTINUOUS, HEAD_DISCRETE, AugmentConfig, NormStats, augment, normalize_action
from .policy import ArchSpec, PolicyParams, tokenize_array


@dataclass(frozen=True)
class Sample:
    """One logged step: the training row schema shared by bootstrap demos and
    collaboration buffers."""

    task: str
    instruction: np.ndarray
    observation: np.ndarray       # stacked history, flat
    action: np.ndarray            # (3,) raw action
    actor: str                    # "policy" | "expert"
    episode_id: int
    step_index: int


@dataclass
class Dataset:
    samples: list[Sample] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.samples)

    def extend(self, more) -> None:
        self.samples.extend(more)

    def actions(self) -> np.ndarray:
        return np.stack([s.action for s in self.samples])

    def canonical(self) -> list[Sample]:
        """Samples in (episode, step) order, independent of storage order, so
        seed-driven batch indices address the same rows either way."""
        return sorted(self.samples, key=lambda s: (s.episode_id, s.step_index))

    def matrices(self) -> tuple[np.ndarray, np.ndarray]:
        rows = self.canonical()
        x = np.stack([np.concatenate([s.instruction, s.observation]) for s in rows])
        y = np.stack([s.action for s in rows])
        return x, y


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 5000
    batch_size: int = 64
    learning_rate: float = 1e-3
    momentum: float = 0.9
    seed: int = 0
    augment: bool = True          # raster mode only; state vectors pass through
    raster_mode: bool = False

    def __post_init__(self) -> None:
        if self.steps < 0 or self.batch_size <= 0 or self.learning_rate < 0:
            raise ValueError("steps, batch_size, learning_rate must be non-negative/positive")


class DivergenceError(RuntimeError):
    """Training loss became non-finite."""


def _forward_cached(params: PolicyParams, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    acts = [x]
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w + b
        if i != last:
            h = np.tanh(h)
        acts.append(h)
    return h, acts


def _targets(params: PolicyParams, actions: np.ndarray, stats: NormStats):
    if params.arch.head == HEAD_DISCRETE:
        return tokenize_array(actions, params.arch.vocab_size)
    return normalize_action(actions, stats, HEAD_CONTINUOUS)


def _loss_and_output_grad(params: PolicyParams, out: np.ndarray, targets: np.ndarray):
    arch = params.arch
    n = out.shape[0]
    if arch.head == HEAD_CONTINUOUS:
        diff = out - targets
        loss = float(np.mean(diff * diff))
        dout = 2.0 * diff / diff.size
        return loss, dout
    logits = out.reshape(n, arch.action_dims, arch.vocab_size)
    z = logits - logits.max(axis=-1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=-1, keepdims=True))
    logp = z - logsum
    rows = np.arange(n)[:, None]
    dims = np.arange(arch.action_dims)[None, :]
    picked = logp[rows, dims, targets]
    loss = float(-picked.mean())
    p = np.exp(logp)
    p[rows, dims, targets] -= 1.0
    dout = (p / (n * arch.action_dims)).reshape(n, -1)
    return loss, dout


def loss(params: PolicyParams, x: np.ndarray, actions: np.ndarray, stats: NormStats) -> float:
    """Mean cross-entropy (discrete head, against tokenized actions) or mean
    squared error (continuous head, against z-scored actions)."""
    out, _ = _forward_cached(params, np.asarray(x, dtype=np.float64))
    value, _ = _loss_and_output_grad(params, out, _targets(params, np.asarray(actions), stats))
    return value


def grad(params: PolicyParams, x: np.ndarray, actions: np.ndarray,
         stats: NormStats) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Backpropagated gradient of the batch loss; returns (loss, dW, db)."""
    x = np.asarray(x, dtype=np.float64)
    out, acts = _forward_cached(params, x)
    value, delta = _loss_and_output_grad(params, out, _targets(params, np.asarray(actions), stats))
    d_w = [np.zeros_like(w) for w in params.weights]
    d_b = [np.zeros_like(b) for b in params.biases]
    for i in range(len(params.weights) - 1, -1, -1):
        d_w[i] = acts[i].T @ delta
        d_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * (1.0 - acts[i] * acts[i])
    return value, d_w, d_b


def fit(params: PolicyParams, dataset: Dataset, stats: NormStats, cfg: TrainConfig,
        mix_dataset: Dataset | None = None) -> PolicyParams:
    """SGD with momentum over seed-driven minibatches, returning a new
    parameter snapshot.

    When `mix_dataset` is given, each batch is drawn half from `dataset` and
    half from `mix_dataset` (the anti-forgetting blend the collaboration
    loop uses: fresh expert steps mixed with the bootstrap demos).
    """
    if len(dataset) == 0:
        raise ValueError("cannot fit on an empty dataset")
    out = params.copy()
    if cfg.steps == 0:
        return out

    x_a, y_a = dataset.matrices()
    pools = [(x_a, y_a)]
    if mix_dataset is not None and len(mix_dataset) > 0:
        pools.append(mix_dataset.matrices())

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    vel_w = [np.zeros_like(w) for w in out.weights]
    vel_b = [np.zeros_like(b) for b in out.biases]
    split = cfg.batch_size // len(pools)

    for _ in range(cfg.steps):
        xs, ys = [], []
        for j, (px, py) in enumerate(pools):
            take = cfg.batch_size - split * (len(pools) - 1) if j == 0 else split
            idx = rng.integers(0, px.shape[0], size=take)
            xs.append(px[idx])
            ys.append(py[idx])
        bx = np.concatenate(xs)
        by = np.concatenate(ys)
        if cfg.raster_mode and cfg.augment:
            bx = _augment_batch(bx, out.arch, rng)
        value, d_w, d_b = grad(out, bx, by, stats)
        if not np.isfinite(value):
            raise DivergenceError(f"non-finite training loss: {value}")
        for i in range(len(out.weights)):
            vel_w[i] = cfg.momentum * vel_w[i] + d_w[i]
            vel_b[i] = cfg.momentum * vel_b[i] + d_b[i]
            out.weights[i] -= cfg.learning_rate * vel_w[i]
            out.biases[i] -= cfg.learning_rate * vel_b[i]
    return out


def _augment_batch(bx: np.ndarray, arch: ArchSpec, rng: np.random.Generator) -> np.ndarray:
    """Augment the raster slice of each input row, leaving the instruction
    prefix and any stacked-history layout intact."""
    from .obs import RASTER_DIM

    bx = bx.copy()
    n_instr = arch.input_dim - (arch.input_dim // RASTER_DIM) * RASTER_DIM
    for row in bx:
        offset = n_instr
        while offset + RASTER_DIM <= bx.shape[1]:
            frame = row[offset:offset + RASTER_DIM]
            if np.any(frame):  # skip zero padding from history warm-up
                row[offset:offset + RASTER_DIM] = augment(frame, rng)
            offset += RASTER_DIM
    return bx


# Checkpoint file format: 8-byte magic, u16 version, u32 metadata length,
# UTF-8 JSON metadata, then each layer's weights and bias as little-endian
# float64 in declared order.
CHECKPOINT_MAGIC = b"CLBARM\x00\x01"
CHECKPOINT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


class BadMagicError(CheckpointError):
    pass


class VersionMismatchError(CheckpointError):
    pass


class TruncatedCheckpointError(CheckpointError):
    pass


class ShapeMismatchError(CheckpointError):
    pass


class HeadMismatchError(CheckpointError):
    pass


def save_checkpoint(path, params: PolicyParams, stats: NormStats, metadata: dict) -> None:
    meta = dict(metadata)
    meta["arch"] = params.arch.to_dict()
    meta["stats"] = stats.to_dict()
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<H", CHECKPOINT_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for w, b in zip(params.weights, params.biases):
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[PolicyParams, NormStats, dict]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(CHECKPOINT_MAGIC) + 6:
        raise TruncatedCheckpointError("file shorter than header")
    if data[:len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise BadMagicError("not a checkpoint file")
    off = len(CHECKPOINT_MAGIC)
    (version,) = struct.unpack_from("<H", data, off)
    off += 2
    if version != CHECKPOINT_VERSION:
        raise VersionMismatchError(f"checkpoint version {version}, expected {CHECKPOINT_VERSION}")
    (meta_len,) = struct.unpack_from("<I", data, off)
    off += 4
    if off + meta_len > len(data):
        raise TruncatedCheckpointError("metadata block truncated")
    meta = json.loads(data[off:off + meta_len].decode("utf-8"))
    off += meta_len

    arch = ArchSpec.from_dict(meta["arch"])
    stats = NormStats.from_dict(meta["stats"])
    dims = arch.layer_dims
    weights, biases = [], []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        need = (d_in * d_out + d_out) * 8
        if off + need > len(data):
            raise TruncatedCheckpointError("parameter arrays truncated")
        w = np.frombuffer(data, dtype="<f8", count=d_in * d_out, offset=off).reshape(d_in, d_out)
        off += d_in * d_out * 8
        b = np.frombuffer(data, dtype="<f8", count=d_out, offset=off)
        off += d_out * 8
        weights.append(w.copy())
        biases.append(b.copy())
    if off != len(data):
        raise ShapeMismatchError("trailing bytes after declared parameter arrays")
    return PolicyParams(arch=arch, weights=weights, biases=biases), stats, meta


def require_head(metadata: dict, expected: str) -> None:
    got = metadata.get("arch", {}).get("head")
    if got != expected:
        raise HeadMismatchError(f"checkpoint has {got!r} head, run expects {expected!r}")
