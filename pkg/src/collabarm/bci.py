"""Synthetic SSVEP channel: multichannel sinusoid-plus-noise generation for a
chosen stimulus frequency, canonical-correlation decoding against sin/cos
reference banks, and the mapping from decoded class to an expert command.

The correlation is the largest singular value of the whitened cross-
covariance Cxx^{-1/2} Cxy Cyy^{-1/2}; covariances are Gram matrices with a
small absolute ridge so degenerate channels stay solvable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .env import WorldState
from .expert import GRIP_CLOSE, GRIP_OPEN, ScriptedController, command_to_action
from .util import count_warning

SAMPLE_RATE = 128
STIMULUS_FREQS: tuple[float, ...] = (8.0, 10.0, 12.0, 15.0)
DEFAULT_CHANNELS = 8
DEFAULT_WINDOW_S = 2.0
HARMONICS = 2
HARMONIC_AMPLITUDES = (1.0, 0.5)
COV_RIDGE = 1e-8
DEFAULT_MARGIN = 0.05

# Stimulus-to-command table. No down command exists, matching a minimal
# four-target stimulus panel; tasks driven by this channel are laid out so
# their handles sit above the gripper's home row.
COMMAND_TABLE: dict[float, str] = {
    8.0: "left",
    10.0: "right",
    12.0: "up",
    15.0: "grip",
}


@dataclass(frozen=True)
class SyntheticEEG:
    freq: float
    noise_std: float
    sample_rate: int
    samples: np.ndarray            # (channels, n_samples)

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def window_s(self) -> float:
        return self.samples.shape[1] / self.sample_rate


def synth(freq: float, noise_std: float, seed: int, channels: int = DEFAULT_CHANNELS,
          sample_rate: int = SAMPLE_RATE, window_s: float = DEFAULT_WINDOW_S) -> SyntheticEEG:
    """Evoked response stand-in: per channel, harmonics of the stimulus
    frequency at a random phase plus white Gaussian noise."""
    if freq not in STIMULUS_FREQS:
        raise ValueError(f"{freq} Hz is not in the stimulus set {STIMULUS_FREQS}")
    rng = np.random.Generator(np.random.PCG64(seed))
    n = int(round(sample_rate * window_s))
    t = np.arange(n) / sample_rate
    phases = rng.uniform(0.0, 2.0 * math.pi, size=channels)
    sig = np.zeros((channels, n), dtype=np.float64)
    for ch in range(channels):
        for h, amp in zip(range(1, HARMONICS + 1), HARMONIC_AMPLITUDES):
            sig[ch] += amp * np.sin(2.0 * math.pi * h * freq * t + phases[ch])
    if noise_std > 0.0:
        sig += rng.normal(0.0, noise_std, size=sig.shape)
    return SyntheticEEG(freq=freq, noise_std=noise_std, sample_rate=sample_rate, samples=sig)


def reference_bank(freq: float, n_samples: int, sample_rate: int = SAMPLE_RATE,
                   harmonics: int = HARMONICS) -> np.ndarray:
    """(2*harmonics, n_samples) sin/cos rows at the candidate frequency."""
    t = np.arange(n_samples) / sample_rate
    rows = []
    for h in range(1, harmonics + 1):
        rows.append(np.sin(2.0 * math.pi * h * freq * t))
        rows.append(np.cos(2.0 * math.pi * h * freq * t))
    return np.stack(rows)


def _inv_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    if np.any(vals < COV_RIDGE * 0.5):
        count_warning("cca.rank_deficient")
    vals = np.maximum(vals, COV_RIDGE)
    return (vecs / np.sqrt(vals)) @ vecs.T


def cca_correlation(signal: np.ndarray, reference: np.ndarray) -> float:
    """Maximal canonical correlation between row-spaces of signal and
    reference, clipped into [0, 1]."""
    x = signal - signal.mean(axis=1, keepdims=True)
    y = reference - reference.mean(axis=1, keepdims=True)
    cxx = x @ x.T + COV_RIDGE * np.eye(x.shape[0])
    cyy = y @ y.T + COV_RIDGE * np.eye(y.shape[0])
    cxy = x @ y.T
    m = _inv_sqrt(cxx) @ cxy @ _inv_sqrt(cyy)
    rho = float(np.linalg.svd(m, compute_uv=False)[0])
    return min(max(rho, 0.0), 1.0)


@dataclass(frozen=True)
class CCAResult:
    correlations: dict[float, float]
    decoded: float
    margin: float


def decode(eeg: SyntheticEEG, stimulus_set: tuple[float, ...] = STIMULUS_FREQS) -> CCAResult:
    n = eeg.samples.shape[1]
    rhos = {
        f: cca_correlation(eeg.samples, reference_bank(f, n, eeg.sample_rate))
        for f in stimulus_set
    }
    ordered = sorted(rhos.items(), key=lambda kv: kv[1], reverse=True)
    decoded = ordered[0][0]
    margin = ordered[0][1] - (ordered[1][1] if len(ordered) > 1 else 0.0)
    return CCAResult(correlations=rhos, decoded=decoded, margin=margin)


def command_map(result: CCAResult, margin_threshold: float = DEFAULT_MARGIN) -> str:
    """Decoded class to expert command; an ambiguous decode is rejected as a
    no-op rather than guessed."""
    if result.margin < margin_threshold:
        return "noop"
    return COMMAND_TABLE[result.decoded]


class BciExpert:
    """Simulated slow expert: the user attends the stimulus matching what the
    scripted controller would do, the synthetic EEG is decoded with CCA, and
    the decoded command becomes the action. Each decision costs
    latency_ticks of episode time."""

    def __init__(self, controller: ScriptedController, seed: int,
                 noise_std: float = 1.0, latency_ticks: int = 48,
                 margin_threshold: float = DEFAULT_MARGIN,
                 window_s: float = DEFAULT_WINDOW_S):
        if latency_ticks < 1:
            raise ValueError("latency_ticks must be >= 1")
        self._controller = controller
        self._noise_std = noise_std
        self._margin_threshold = margin_threshold
        self._window_s = window_s
        self._seeds = np.random.SeedSequence(seed)
        self.latency_ticks = latency_ticks
        self.decisions = 0

    def intent(self, state: WorldState) -> str:
        """Which stimulus the simulated user attends for this state: the grip
        toggle when the scripted plan wants the grip state changed, else the
        available direction most aligned with the scripted motion."""
        want = self._controller.action(state)
        wants_closed = want.grip > 0.0
        wants_open = want.grip < 0.0
        if (wants_closed and not state.gripper_closed) or (wants_open and state.gripper_closed):
            return "grip"
        scores = {"left": -want.dx, "right": want.dx, "up": want.dy}
        best = max(scores, key=lambda k: scores[k])
        if scores[best] <= 1e-9:
            return "noop"
        return best

    def action(self, state: WorldState):
        command = self.intent(state)
        self.decisions += 1
        if command != "noop":
            freq = next(f for f, c in COMMAND_TABLE.items() if c == command)
            child = self._seeds.spawn(1)[0]
            eeg = synth(freq, self._noise_std, int(child.generate_state(1)[0]),
                        window_s=self._window_s)
            command = command_map(decode(eeg), self._margin_threshold)
        return command_to_action(command, state.gripper_closed)
