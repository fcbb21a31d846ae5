"""
Trial Runner - Deterministic Parallel Trial Blocks
Splits a trial budget into fixed blocks, gives each block its own substream,
and sums the per-block count vectors

The partition depends only on (trials, cells per trial, rule), never on the
worker count, so any number of workers yields identical counts.
"""
import functools
import logging
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Callable, List, Tuple

import numpy as np

from core.errors import ParameterError
from walks.substreams import experiment_tag, substream

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_TRIALS = 4096
DEFAULT_MAX_BLOCK_CELLS = 1 << 22

Block = Tuple[int, int, int]


@dataclass(frozen=True)
class PartitionRule:
    """How trials are cut into blocks"""
    block_trials: int = DEFAULT_BLOCK_TRIALS
    max_block_cells: int = DEFAULT_MAX_BLOCK_CELLS

    def block_size(self, cells_per_trial: int) -> int:
        return max(1, min(self.block_trials, self.max_block_cells // max(1, cells_per_trial)))

    def blocks(self, trials: int, cells_per_trial: int) -> List[Block]:
        """
        Returns:
            list: (block_index, first_trial, trial_count) triples
        """
        size = self.block_size(cells_per_trial)
        return [
            (index, start, min(size, trials - start))
            for index, start in enumerate(range(0, trials, size))
        ]


DEFAULT_RULE = PartitionRule()


def _run_block(kernel: Callable, seed: int, tag: int, kwargs: dict, block: Block) -> np.ndarray:
    index, start, count = block
    rng = substream(seed, tag, index)
    return np.asarray(kernel(rng, start, count, **kwargs))


def map_blocks(kernel: Callable, trials: int, seed: int, name: str, cells_per_trial: int,
               workers: int = 1, rule: PartitionRule = None, **kwargs) -> List[np.ndarray]:
    """
    Run `trials` trials of a kernel block by block

    Args:
        kernel: module-level function (rng, first_trial, count, **kwargs) -> array
        trials: total trials, >= 1
        seed: run seed
        name: experiment name, selects the substream family
        cells_per_trial: walk-matrix cells one trial needs (sizes the blocks)
        workers: processes; 1 runs in-process
        rule: partition rule, default DEFAULT_RULE

    Returns:
        list: per-block kernel results in block order
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")

    rule = rule or DEFAULT_RULE
    blocks = rule.blocks(trials, cells_per_trial)
    task = functools.partial(_run_block, kernel, seed, experiment_tag(name), kwargs)
    logger.debug(f"🎲 {name}: {trials} trials in {len(blocks)} blocks, {workers} worker(s)")

    if workers > 1 and len(blocks) > 1:
        with Pool(processes=min(workers, len(blocks))) as pool:
            return pool.map(task, blocks)
    return [task(block) for block in blocks]


def run_trials(kernel: Callable, trials: int, seed: int, name: str, cells_per_trial: int,
               workers: int = 1, rule: PartitionRule = None, **kwargs) -> np.ndarray:
    """
    Run a counting kernel over `trials` trials (see map_blocks)

    Returns:
        np.ndarray: summed int64 count vector
    """
    results = map_blocks(kernel, trials, seed, name, cells_per_trial, workers, rule, **kwargs)
    return np.sum(results, axis=0, dtype=np.int64)
