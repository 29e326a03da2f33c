"""Named, seeded random streams."""

import numpy as np

# Spawn order is part of the reproducibility contract; append, never reorder.
STREAM_NAMES = ("operators", "scenarios", "random_scenarios", "montecarlo")


def streams(seed: int) -> dict[str, np.random.Generator]:
    """
    Independent PCG64 generators derived from one run seed.

    Args:
        seed (int): run seed, non-negative.

    Returns:
        dict[str, np.random.Generator]: one generator per name in STREAM_NAMES.
    """
    if seed < 0:
        raise ValueError(f"seed must not be negative, got {seed}")
    children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
    return {name: np.random.default_rng(child) for name, child in zip(STREAM_NAMES, children, strict=True)}


def stream(seed: int, name: str) -> np.random.Generator:
    """Generator for one named stream of a run seed."""
    if name not in STREAM_NAMES:
        raise ValueError(f"unknown random stream '{name}', expected one of {list(STREAM_NAMES)}")
    return streams(seed)[name]
