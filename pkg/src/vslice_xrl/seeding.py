"""Named RNG streams fanned out from one master seed."""
import numpy as np

STREAMS = {"env": 0, "init": 1, "noise": 2, "replay": 3, "shapley": 4, "eval": 5}


def stream_key(seed: int, name: str, *extra: int) -> tuple:
    if name not in STREAMS:
        raise KeyError(f"unknown RNG stream {name!r}")
    return (int(seed), STREAMS[name], *(int(x) for x in extra))


def stream(seed: int, name: str, *extra: int) -> np.random.Generator:
    """Independent generator for ``(seed, name, *extra)``."""
    return np.random.default_rng(np.random.SeedSequence(stream_key(seed, name, *extra)))


def env_seed(seed: int, *extra: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(stream_key(seed, "env", *extra))
