"""Seed-stream plumbing shared by the selection and benchmark layers.

Substreams are derived functionally through ``SeedSequence.spawn_key``
composition, so deriving a child never mutates the parent and the same
(parent, index) pair always yields the same stream regardless of
execution order.
"""

from __future__ import annotations

import numpy as np

SeedLike = int | np.random.SeedSequence | np.random.Generator | None


def as_seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    """Normalize an int / SeedSequence / Generator / None into a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        # Draw fresh entropy; deterministic given the generator's state.
        return np.random.SeedSequence(int(seed.integers(np.iinfo(np.int64).max)))
    if seed is None:
        return np.random.SeedSequence()
    return np.random.SeedSequence(int(seed))


def child_seed(parent: np.random.SeedSequence, index: int) -> np.random.SeedSequence:
    """Return the ``index``-th child of ``parent`` without mutating it.

    Equivalent to ``parent.spawn(index + 1)[index]``.
    """
    return np.random.SeedSequence(
        entropy=parent.entropy,
        spawn_key=tuple(parent.spawn_key) + (index,),
    )


def generator(seed: SeedLike) -> np.random.Generator:
    return np.random.default_rng(as_seed_sequence(seed))
