"""Seed derivation and Monte Carlo summaries.

Every random stream in the package is derived from a root seed and a tuple of
integer coordinates (environment index, generation count, block index, ...)
through :func:`derive_seed`.  The mixing function is SplitMix64's finalizer
applied to the running state after adding each coordinate and the golden-ratio
increment.  Replicates are grouped into fixed-size blocks and each block owns
one stream, so the result of a run never depends on how blocks are scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(root: int, *coords: int) -> int:
    """Mix ``root`` with integer coordinates into a 64-bit seed."""
    state = splitmix64(int(root) & MASK64)
    for c in coords:
        state = splitmix64((state ^ (int(c) & MASK64)) & MASK64)
    return state


def generator(root: int, *coords: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(root, *coords)))


def block_slices(total: int, block: int):
    """Split ``range(total)`` into consecutive ``(start, stop)`` blocks."""
    return [(s, min(s + block, total)) for s in range(0, total, block)]


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    replicates: int
    seed: int

    @classmethod
    def from_moments(cls, total, total_sq, count, seed):
        mean = total / count
        if count > 1:
            var = max(total_sq / count - mean * mean, 0.0) * count / (count - 1)
            se = math.sqrt(var / count)
        else:
            se = math.inf
        return cls(mean, se, count, seed)

    @classmethod
    def from_samples(cls, samples, seed):
        x = np.asarray(samples, dtype=float)
        return cls.from_moments(float(x.sum()), float((x * x).sum()), x.size, seed)

    def within(self, target, k=4.0):
        """True if ``target`` lies within ``k`` standard errors."""
        if self.stderr == 0.0:
            return abs(self.value - target) <= 1e-12 * max(1.0, abs(target))
        return abs(self.value - target) <= k * self.stderr


BLOCK = 1024


def kernel_seed(root: int, *coords: int) -> int:
    """32-bit seed for numba's generator (it accepts uint32 only)."""
    return derive_seed(root, *coords) & 0xFFFFFFFF


def run_blocks(fn, tasks, workers: int = 1):
    """Apply ``fn`` to every task and return results in task order.

    Threads are used because the compiled kernels release the GIL; since every
    task owns its stream and results are collected by position, the output is
    independent of ``workers``.
    """
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))
