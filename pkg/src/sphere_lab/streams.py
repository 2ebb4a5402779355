"""Counter-based random streams keyed by ``(seed, stream_id)``.

Every logical draw (one spectral-radius sample, one oracle matrix chain, ...)
owns a Philox generator whose 128-bit key is the pair ``(seed, stream_id)``.
Results therefore depend only on the key, never on which worker ran them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

U64_MAX = 2**64 - 1


def _check_u64(value: int, name: str) -> int:
    if int(value) != value or not 0 <= value <= U64_MAX:
        raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class RngStreamSpec:
    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        _check_u64(self.seed, "seed")
        _check_u64(self.stream_id, "stream_id")

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def as_generator(stream: RngStreamSpec | np.random.Generator) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, RngStreamSpec):
        return stream.generator()
    raise TypeError(f"expected RngStreamSpec or numpy Generator, got {type(stream).__name__}")


def derive_seed(seed: int, offset: int) -> int:
    """Fixed-offset child seed, wrapping modulo 2**64."""
    return (_check_u64(seed, "seed") + int(offset)) % (U64_MAX + 1)
