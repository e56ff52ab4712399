"""Counter-based random substreams keyed to sample position.

Work is cut into fixed-size batches of consecutive samples and every
batch owns a Philox stream whose counter encodes the batch index, never
the worker that happens to execute it.  Any worker count therefore
replays exactly the same sample multiset; a disjoint counter region is
reserved for center-estimation passes.
"""

from __future__ import annotations

import numpy as np

BATCH_SIZE = 8192
_CENTER_REGION = 1 << 192

__all__ = ["BATCH_SIZE", "substream", "batch_sizes"]


def substream(seed: int, batch_index: int, center_pass: bool = False) -> np.random.Generator:
    """Generator for one batch; the center pass lives in its own counter region."""
    if batch_index < 0:
        raise ValueError("batch index must be nonnegative")
    counter = batch_index << 64
    if center_pass:
        counter += _CENTER_REGION
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def batch_sizes(total: int, batch: int = BATCH_SIZE) -> list[int]:
    """Sizes of the consecutive batches covering ``total`` samples."""
    if total < 0:
        raise ValueError("total must be nonnegative")
    full, rem = divmod(total, batch)
    return [batch] * full + ([rem] if rem else [])
