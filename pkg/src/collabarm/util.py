"""Small shared helpers."""

from __future__ import annotations

from collections import Counter

# Soft-failure tallies (out-of-bounds tokenize clamps, regularized covariance
# solves, ...). Keyed by event name; tests reset and inspect them.
WARNING_COUNTERS: Counter = Counter()


def count_warning(name: str) -> None:
    WARNING_COUNTERS[name] += 1


def reset_warnings() -> None:
    WARNING_COUNTERS.clear()
