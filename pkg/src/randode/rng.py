"""Counter-based substreams for reproducible parallel Monte Carlo.

Every random draw in the package comes from a Philox stream keyed by
(seed, replicate) with the step index placed in the counter block.  Streams
for distinct (seed, replicate, step) triples are disjoint, so ensemble
results are a pure function of the configuration and seed, independent of
thread count or execution order.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def substream(seed, replicate=0, step=0):
    """Return a fresh Generator for the given (seed, replicate, step) triple.

    Counter word 0 is left free for intra-step draws; each step therefore
    owns 2**64 counter values before colliding with its neighbour.
    """
    key = np.array([int(seed) & _MASK64, int(replicate) & _MASK64],
                   dtype=np.uint64)
    counter = np.array([0, int(step) & _MASK64, 0, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))
