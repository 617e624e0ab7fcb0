"""Counter-based uniforms built on the SplitMix64 output function.

Draw ``slot`` of trial ``t`` under ``seed`` is the SplitMix64 stream keyed
by ``mix64(seed)`` read at position ``t * SLOTS + slot``. Every value is a
pure function of ``(seed, trial, slot)``, so trials can be generated in any
order, in chunks, or concurrently, and always produce the same numbers.
"""

from __future__ import annotations

import numpy as np

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(n) for n in (30, 27, 31, 11))
MASK64 = (1 << 64) - 1
SLOTS = 8


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def mix64(x: int) -> int:
    """SplitMix64 finalizer on one Python integer."""
    with np.errstate(over="ignore"):
        return int(_mix(np.array([x & MASK64], dtype=np.uint64))[0])


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return seed


def raw_bits(seed: int, trials: np.ndarray, slot: int) -> np.ndarray:
    """64-bit outputs for ``slot`` of each trial index in ``trials``."""
    key = np.uint64(mix64(check_seed(seed)))
    counter = trials.astype(np.uint64) * np.uint64(SLOTS) + np.uint64(slot)
    with np.errstate(over="ignore"):
        return _mix(key + (counter + np.uint64(1)) * GOLDEN_GAMMA)


def uniforms(seed: int, trials: np.ndarray, slot: int) -> np.ndarray:
    """Doubles in [0, 1) with 53 random bits."""
    return (raw_bits(seed, trials, slot) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def derive_seed(seed: int, *labels: int) -> int:
    """Child seed for a labelled sub-experiment (grid point, replicate, ...)."""
    out = check_seed(seed)
    for label in labels:
        out = mix64(out ^ mix64(int(label) + 0x632BE59BD9B4E019))
    return out
