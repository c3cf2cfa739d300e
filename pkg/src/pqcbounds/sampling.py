"""Counter-based random streams.

Every chunk of ``CHUNK`` consecutive samples draws from its own generator seeded
by ``(seed, chunk index)``, so any subset of chunks can be produced
independently (serially or in parallel) and always yields the same numbers.
"""
from __future__ import annotations

from typing import Callable, Iterator

import numpy as np

CHUNK = 4096


def chunk_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), stream, index]))


def chunks(n_samples: int, chunk: int = CHUNK) -> Iterator[tuple[int, int, int]]:
    """Yield ``(chunk index, start, stop)`` covering ``range(n_samples)``."""
    for idx, start in enumerate(range(0, n_samples, chunk)):
        yield idx, start, min(start + chunk, n_samples)


def stream(
    seed: int,
    n_samples: int,
    draw: Callable[[np.random.Generator, int], np.ndarray],
    stream_id: int = 0,
    chunk: int = CHUNK,
) -> Iterator[np.ndarray]:
    """Yield ``draw(rng, size)`` per chunk with chunk-keyed generators."""
    for idx, start, stop in chunks(n_samples, chunk):
        yield draw(chunk_rng(seed, idx, stream_id), stop - start)


def discrete_points(seed: int, n_samples: int, m: int) -> Iterator[np.ndarray]:
    """Uniform points of ``{0, pi/2}^m`` as 0/1 quarter-turn arrays."""
    return stream(seed, n_samples, lambda g, k: g.integers(0, 2, size=(k, m), dtype=np.uint8))


def uniform_angles(seed: int, n_samples: int, m: int, scale: float = 1.0) -> Iterator[np.ndarray]:
    """Uniform points of ``[-scale*pi, scale*pi]^m``."""
    return stream(
        seed, n_samples, lambda g, k: g.uniform(-scale * np.pi, scale * np.pi, size=(k, m)), stream_id=1
    )


def all_points(m: int) -> np.ndarray:
    """Every point of ``{0, 1}^m`` (as quarter turns), row ``i`` = binary digits of ``i``."""
    idx = np.arange(1 << m, dtype=np.int64)
    return ((idx[:, None] >> np.arange(m)) & 1).astype(np.uint8)
