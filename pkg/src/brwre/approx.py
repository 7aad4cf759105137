"""Space-time adapted couples and the maximal-inequality harness."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import USE_NUMBA
from ._kernels import kernel
from .errors import NonLatticeError
from .pointprocess import as_fraction
from .rwre import CorridorSpec, LatticeWalk, corridor_log_probability
from .streams import BLOCK, McEstimate, block_slices, generator, kernel_seed, run_blocks


@dataclass(frozen=True)
class StaQuery:
    m: float
    l: int
    beta: float
    iota: float
    var: float
    abs_moment: float = 1.0

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("m must be positive")
        if self.l < 1:
            raise ValueError("l must be a positive integer")
        if self.beta < 2:
            raise ValueError("beta must be >= 2")
        if not self.iota > 2:
            raise ValueError("iota must be > 2")
        if self.var < 0 or not math.isfinite(self.abs_moment):
            raise ValueError("moments must be finite and var >= 0")


@dataclass(frozen=True)
class StaResult:
    is_sta: bool
    criterion_value: float


def sta_criterion(q: StaQuery) -> float:
    """``iota var l m^-2 log(l m^-beta)``."""
    if q.var == 0.0:
        return 0.0
    return q.iota * q.var * q.l / q.m**2 * (math.log(q.l) - q.beta * math.log(q.m))


def sta_couple_check(q: StaQuery) -> StaResult:
    c = sta_criterion(q)
    return StaResult(c >= -1.0, c)


def maximal_tail_bound(l: int, m: float, beta: float, C: float) -> float:
    """``C l / m^beta``."""
    if not m > 0:
        raise ValueError("m must be positive")
    return C * l / m**beta


def _centred(values, probs):
    v = np.asarray([float(x) for x in values])
    p = np.asarray(probs, float)
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("step probabilities must sum to 1")
    return v - float(p @ v), p


def empirical_max_tail(values, probs, l: int, m_grid, replicates: int = 20_000, seed: int = 0,
                       mode: str = "mc", workers: int = 1):
    """``P(max_{i<=l} |S_i| >= m)`` for each ``m`` in ``m_grid``.

    Steps are shifted to mean zero.  ``mc`` simulates ``replicates`` paths;
    ``exact`` runs the absorbing recursion on the step lattice (values must be
    rational with mean zero) and reports zero standard error.
    """
    m_grid = [float(m) for m in m_grid]
    if mode == "exact":
        fr = [as_fraction(v) for v in values]
        p = np.asarray(probs, float)
        if abs(sum(float(f) * q for f, q in zip(fr, p))) > 1e-12:
            raise NonLatticeError("exact mode needs a mean-zero rational step law")
        walk = LatticeWalk.from_step_law(fr, p, l)
        scale = round(1.0 / walk.gain)
        out = []
        for m in m_grid:
            inner = (math.ceil(m * scale - 1e-9) - 1) / scale
            if inner < 0:
                out.append(McEstimate(1.0, 0.0, 0, seed))
                continue
            stay = math.exp(corridor_log_probability(walk, CorridorSpec.symmetric(l, inner)))
            out.append(McEstimate(max(0.0, 1.0 - stay), 0.0, 0, seed))
        return out
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    v, p = _centred(values, probs)
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    blocks = block_slices(replicates, BLOCK)

    def task(b):
        start, stop = blocks[b]
        rng = kernel_seed(seed, 0x81, b) if USE_NUMBA else generator(seed, 0x81, b)
        return kernel("max_excursion")(rng, stop - start, l, v, cdf)

    top = np.concatenate(run_blocks(task, range(len(blocks)), workers))
    out = []
    for m in m_grid:
        k = float((top >= m - 1e-12).sum())
        out.append(McEstimate.from_moments(k, k, replicates, seed))
    return out


def fit_tail_constant(l: int, m_grid, tails, beta: float) -> float:
    """Smallest ``C`` with ``C l / m^beta`` above every empirical point."""
    vals = [t * m**beta / l for m, t in zip(m_grid, tails)]
    return max(vals) if vals else 0.0


def loglog_slope(m_grid, tails) -> float:
    """Least-squares slope of ``log tail`` against ``log m`` (positive tails only)."""
    m = np.asarray(m_grid, float)
    t = np.asarray(tails, float)
    keep = t > 0
    if keep.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(m[keep]), np.log(t[keep]), 1)[0])
