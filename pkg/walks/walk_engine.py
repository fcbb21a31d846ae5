"""
Walk Engine - Symmetric Random Walks and Adversarial Stopping
Generates fair ±1 coinflip streams and truncates them where an adversary
watching the stream would choose to stop it
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from core.errors import BudgetError, ParameterError

# n(n-t) never gets near this at desk scale
MAX_STREAM_LENGTH = 2 ** 31
# batched prefix sums are int32
MAX_BATCH_LENGTH = 2 ** 31 - 1

PLUS = 1
MINUS = -1


class StopKind(Enum):
    """Stopping rules the adversary may play"""
    NO_STOP = "no_stop"
    FIXED_LENGTH = "fixed_length"
    FIRST_HIT = "first_hit"
    OMNISCIENT_EXTREME = "omniscient_extreme"


@dataclass(frozen=True)
class WalkTrace:
    """
    A realized ±1 walk

    prefix_sums[k] is the sum of the first k steps, prefix_sums[0] = 0.
    run_max / run_min include prefix 0, argmax / argmin are the smallest
    indices attaining them.
    """
    steps: np.ndarray
    prefix_sums: np.ndarray
    run_max: int
    run_min: int
    argmax: int
    argmin: int

    @property
    def length(self) -> int:
        return int(self.steps.shape[0])


def _check_direction(direction: int):
    if direction not in (PLUS, MINUS):
        raise ParameterError(f"direction must be +1 or -1, got {direction}")


@dataclass(frozen=True)
class StoppingStrategy:
    """
    An adversary's rule for where to truncate a coinflip stream

    Use the constructors no_stop(), fixed_length(), first_hit() and
    omniscient_extreme(). A window of None means [1, length]
    ([0, length] for FixedLength).
    """
    kind: StopKind
    k: Optional[int] = None
    threshold: Optional[float] = None
    direction: int = PLUS
    window: Optional[Tuple[int, int]] = None

    @classmethod
    def no_stop(cls) -> "StoppingStrategy":
        return cls(StopKind.NO_STOP)

    @classmethod
    def fixed_length(cls, k: int, window: Optional[Tuple[int, int]] = None) -> "StoppingStrategy":
        if k < 0:
            raise ParameterError(f"FixedLength k must be >= 0, got {k}")
        return cls(StopKind.FIXED_LENGTH, k=int(k), window=window)

    @classmethod
    def first_hit(cls, threshold: float, direction: int = PLUS,
                  window: Optional[Tuple[int, int]] = None) -> "StoppingStrategy":
        if threshold < 1:
            raise ParameterError(f"FirstHit threshold must be >= 1, got {threshold}")
        _check_direction(direction)
        return cls(StopKind.FIRST_HIT, threshold=threshold, direction=direction, window=window)

    @classmethod
    def omniscient_extreme(cls, direction: int = PLUS,
                           window: Optional[Tuple[int, int]] = None) -> "StoppingStrategy":
        _check_direction(direction)
        return cls(StopKind.OMNISCIENT_EXTREME, direction=direction, window=window)

    def resolve_window(self, length: int) -> Tuple[int, int]:
        """
        Concrete [lo, hi] window for a stream of the given length

        Raises:
            ParameterError: window (or k) not admissible for this length
        """
        if self.kind is StopKind.NO_STOP:
            return length, length

        if self.kind is StopKind.FIXED_LENGTH:
            lo, hi = self.window if self.window is not None else (0, length)
            if not 0 <= lo <= hi <= length:
                raise ParameterError(f"invalid window [{lo}, {hi}] for stream of {length} steps")
            if not lo <= self.k <= hi:
                raise ParameterError(f"FixedLength k={self.k} outside window [{lo}, {hi}]")
            return lo, hi

        lo, hi = self.window if self.window is not None else (1, length)
        if not 1 <= lo <= hi <= length:
            raise ParameterError(f"invalid window [{lo}, {hi}] for stream of {length} steps")
        return lo, hi

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "k": self.k,
            "threshold": self.threshold,
            "direction": self.direction,
            "window": list(self.window) if self.window is not None else None,
        }


@dataclass(frozen=True)
class StoppedStream:
    """Where the adversary stopped a stream and the sum it left behind"""
    stop_index: int
    value: int
    strategy_used: StoppingStrategy


def draw_steps(rng: np.random.Generator, shape) -> np.ndarray:
    """Independent fair ±1 steps as int8"""
    return 2 * rng.integers(0, 2, size=shape, dtype=np.int8) - 1


def trace_from_steps(steps) -> WalkTrace:
    """Build a WalkTrace (prefix sums and extrema) from a ±1 step sequence"""
    steps = np.array(steps, dtype=np.int8)
    if steps.ndim != 1 or np.any(np.abs(steps) != 1):
        raise ParameterError("steps must be a one-dimensional sequence of ±1")
    prefix = np.zeros(steps.shape[0] + 1, dtype=np.int64)
    np.cumsum(steps, dtype=np.int64, out=prefix[1:])
    steps.setflags(write=False)
    prefix.setflags(write=False)
    return WalkTrace(
        steps=steps,
        prefix_sums=prefix,
        run_max=int(prefix.max()),
        run_min=int(prefix.min()),
        argmax=int(prefix.argmax()),
        argmin=int(prefix.argmin()),
    )


def generate_walk(length: int, rng: np.random.Generator) -> WalkTrace:
    """
    Generate one symmetric walk of `length` steps

    Args:
        length: number of coinflips, 0 allowed
        rng: seeded random source (see walks.substreams)

    Returns:
        WalkTrace: steps, prefix sums and running extrema
    """
    if length < 0:
        raise ParameterError(f"length must be >= 0, got {length}")
    if length > MAX_STREAM_LENGTH:
        raise BudgetError(f"stream of {length} steps exceeds cap of {MAX_STREAM_LENGTH}")
    return trace_from_steps(draw_steps(rng, length))


def generate_walks(count: int, length: int, rng: np.random.Generator) -> np.ndarray:
    """
    Generate `count` independent walks at once

    Returns:
        np.ndarray: (count, length + 1) int32 prefix sums, column 0 all zero
    """
    if count < 0 or length < 0:
        raise ParameterError(f"count and length must be >= 0, got {count}, {length}")
    if length > MAX_BATCH_LENGTH:
        raise BudgetError(f"batched stream of {length} steps exceeds cap of {MAX_BATCH_LENGTH}")
    prefix = np.zeros((count, length + 1), dtype=np.int32)
    if length and count:
        np.cumsum(draw_steps(rng, (count, length)), axis=1, dtype=np.int32, out=prefix[:, 1:])
    return prefix


def stop_batch(prefix: np.ndarray, strategy: StoppingStrategy) -> Tuple[np.ndarray, np.ndarray]:
    """
    Apply a stopping strategy to every row of a prefix-sum matrix

    Args:
        prefix: (count, length + 1) prefix sums
        strategy: stopping rule, window resolved against `length`

    Returns:
        tuple: (stop_indices, values), both of shape (count,)
    """
    prefix = np.atleast_2d(prefix)
    count, width = prefix.shape
    length = width - 1
    lo, hi = strategy.resolve_window(length)

    if strategy.kind is StopKind.NO_STOP:
        indices = np.full(count, length, dtype=np.int64)
    elif strategy.kind is StopKind.FIXED_LENGTH:
        indices = np.full(count, strategy.k, dtype=np.int64)
    elif strategy.kind is StopKind.FIRST_HIT:
        segment = prefix[:, lo:hi + 1].astype(np.int64) * strategy.direction
        hit = segment >= strategy.threshold
        # a walk that never reaches the threshold runs to the end of the window
        indices = np.where(hit.any(axis=1), hit.argmax(axis=1) + lo, hi).astype(np.int64)
    else:
        segment = prefix[:, lo:hi + 1].astype(np.int64) * strategy.direction
        # argmax picks the smallest index among ties
        indices = (segment.argmax(axis=1) + lo).astype(np.int64)

    values = prefix[np.arange(count), indices].astype(np.int64)
    return indices, values


def apply_stop(trace: WalkTrace, strategy: StoppingStrategy) -> StoppedStream:
    """
    Stop a single realized walk

    Args:
        trace: the walk
        strategy: the adversary's rule

    Returns:
        StoppedStream: stop index, prefix sum there, strategy used

    Raises:
        ParameterError: strategy window invalid for the trace length
    """
    indices, values = stop_batch(trace.prefix_sums[np.newaxis, :], strategy)
    return StoppedStream(stop_index=int(indices[0]), value=int(values[0]), strategy_used=strategy)
