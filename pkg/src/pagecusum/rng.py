"""Counter-based RNG streams for reproducible (parallel) Monte Carlo."""

import numpy as np

_UINT64 = 1 << 64

# stream index reserved for bootstrap resampling inside estimate_critical_value;
# simulation paths use indices 0, 1, 2, ... and never reach this value
BOOTSTRAP_STREAM = 1 << 62


def rng_stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for stream `index` under master `seed`.

    Streams are Philox counter-based and keyed directly by (seed, index), so
    any worker can recreate stream i without touching the other streams.
    Results are therefore identical no matter how work is batched or
    distributed over processes.
    """
    key = (seed % _UINT64) * _UINT64 + (index % _UINT64)
    return np.random.Generator(np.random.Philox(key=key))
