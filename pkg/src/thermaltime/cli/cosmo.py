"""Smallest clock energy step compatible with a recurrence time of the universe."""

from __future__ import annotations

import math

from scipy.constants import hbar


def cosmo_bound(T_universe: float) -> float:
    """``2 pi hbar / T`` in joules for ``T`` in seconds (SI, not natural units)."""
    T = float(T_universe)
    if not (math.isfinite(T) and T > 0):
        raise ValueError(f"T_universe must be a positive number of seconds, got {T_universe}")
    return 2.0 * math.pi * hbar / T
