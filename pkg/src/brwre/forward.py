"""Quenched forward simulation under a barrier, exact survival, second moments."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import USE_NUMBA
from ._kernels import BIG, kernel
from .environment import BarrierSpec, EnvironmentSequence, barrier_curve, cumulative_kappa
from .lattice import NO_CAP, ceil_cut, displacement_range, floor_cut, law_arrays
from .streams import BLOCK, McEstimate, block_slices, derive_seed, generator, kernel_seed, run_blocks

POPULATION_CAP = 10**6
SPLIT = 64


@dataclass(frozen=True)
class PopulationCaps:
    """Population cap plus the optional truncations defining ``Y-hat_n``.

    With ``yhat`` set a child must also sit at or above
    ``-n^(1/3) - K_i / vartheta`` and its parent must have at most
    ``exp(n^cap_exponent)`` children.
    """
    population: int = POPULATION_CAP
    yhat: bool = False
    cap_exponent: float = 1.0 / 3.0

    def offspring_cap(self, n: int) -> float:
        return math.exp(n**self.cap_exponent) if self.yhat else math.inf


@dataclass(frozen=True)
class PopulationSnapshot:
    generation: int
    positions: np.ndarray
    counts: np.ndarray
    truncated: bool


@dataclass(frozen=True)
class SurvivalRun:
    sizes: np.ndarray
    min_positions: np.ndarray
    survived: bool
    truncated: bool


@dataclass(frozen=True)
class SurvivalEstimate:
    estimate: McEstimate
    truncated_fraction: float

    @property
    def value(self):
        return self.estimate.value

    @property
    def stderr(self):
        return self.estimate.stderr


@dataclass(frozen=True)
class SecondMomentBound:
    lower_bound: float
    first: float
    second: float
    stderr: float = 0.0


@dataclass(frozen=True)
class _Setup:
    scale: int
    args: tuple
    base: int
    width: int


def _setup(envseq: EnvironmentSequence, barrier, n: int, caps: PopulationCaps,
           vartheta: float | None = None) -> _Setup:
    if len(envseq) < n:
        raise ValueError(f"environment has length {len(envseq)} < n={n}")
    env = envseq.prefix(n)
    envlaw = env.source
    scale = envlaw.denominator
    atom_start, prob, child_start, disp = law_arrays(envlaw, scale)
    dmin, dmax = displacement_range(envlaw, scale)
    base = n * min(dmin, 0)
    width = n * (max(dmax, 0) - min(dmin, 0)) + 1
    if barrier is not None:
        hi = floor_cut(barrier_curve(env, barrier), scale)
        vartheta = barrier.vartheta if vartheta is None else vartheta
    else:
        hi = np.full(n + 1, NO_CAP, np.int64)
    if caps.yhat:
        if vartheta is None:
            raise ValueError("the Y-hat floor needs vartheta")
        K = cumulative_kappa(env, vartheta)
        lo = ceil_cut(-n ** (1.0 / 3.0) - K / vartheta, scale)
    else:
        lo = np.full(n + 1, -NO_CAP, np.int64)
    cap = caps.offspring_cap(n)
    offcap = int(min(math.floor(cap + 1e-9), NO_CAP)) if math.isfinite(cap) else int(NO_CAP)
    args = (env.indices, atom_start, prob, child_start, disp, hi, lo, offcap)
    return _Setup(scale, args, base, width)


def simulate_population(envseq: EnvironmentSequence, barrier: BarrierSpec | None, n: int,
                        caps: PopulationCaps = PopulationCaps(), seed: int = 0) -> SurvivalRun:
    """One quenched realization of generations ``0..n``.

    A child at ``v`` in generation ``i`` survives iff ``v <= phi(i)``; when the
    population cap binds, the highest particles are discarded and the run is
    flagged, so ``survived`` is then a lower-bound indicator.
    """
    st = _setup(envseq, barrier, n, caps)
    if USE_NUMBA:
        s, t, sizes, minpos = kernel("population_single")(
            kernel_seed(seed, 0x51), n, *st.args, caps.population, st.base, st.width)
    else:
        s, t, sizes, minpos = kernel("population_single")(
            generator(seed, 0x51), n, *st.args, caps.population, st.base, st.width)
    mins = np.where(minpos == BIG, np.nan, minpos / st.scale)
    return SurvivalRun(sizes=np.asarray(sizes), min_positions=mins, survived=bool(s), truncated=bool(t))


def snapshot_positions(envseq, barrier, n, caps=PopulationCaps(), seed=0) -> PopulationSnapshot:
    """Generation-``n`` population of a small run, compressed as (position, count)."""
    run = simulate_population(envseq, barrier, n, caps, seed)
    # rerun the numpy path to expose positions; only meant for inspection
    st = _setup(envseq, barrier, n, caps)
    rng = generator(seed, 0x52)
    idx = np.array([0], np.int64)
    cnt = np.array([1], np.int64)
    env_idx, atom_start, prob, child_start, disp, hi, lo, offcap = st.args
    for g in range(n):
        k = env_idx[g]
        a0, a1 = atom_start[k], atom_start[k + 1]
        draws = rng.multinomial(cnt, prob[a0:a1] / prob[a0:a1].sum())
        acc: dict = {}
        for a in range(a0, a1):
            if child_start[a + 1] - child_start[a] > offcap:
                continue
            for ci in range(child_start[a], child_start[a + 1]):
                for p, c in zip(idx + disp[ci], draws[:, a - a0]):
                    if c and lo[g + 1] <= p <= hi[g + 1]:
                        acc[int(p)] = acc.get(int(p), 0) + int(c)
        if not acc:
            idx = np.zeros(0, np.int64)
            cnt = np.zeros(0, np.int64)
            break
        keys = sorted(acc)
        idx = np.array(keys, np.int64)
        cnt = np.array([acc[k] for k in keys], np.int64)
    return PopulationSnapshot(n, idx / st.scale, cnt, run.truncated)


def _population_blocks(st: _Setup, n, replicates, seed, coords, popcap, workers):
    blocks = block_slices(replicates, BLOCK)

    def task(b):
        start, stop = blocks[b]
        if USE_NUMBA:
            return kernel("population_block")(kernel_seed(seed, *coords, b), stop - start, n,
                                              *st.args, popcap, st.base, st.width)
        return kernel("population_block")(generator(seed, *coords, b), stop - start, n,
                                          *st.args, popcap, st.base, st.width)

    parts = run_blocks(task, range(len(blocks)), workers)
    survived = np.concatenate([p[0] for p in parts])
    truncated = np.concatenate([p[1] for p in parts])
    final = np.concatenate([p[2] for p in parts])
    return survived, truncated, final


def quenched_survival(envseq: EnvironmentSequence, barrier: BarrierSpec | None, n: int,
                      replicates: int, seed: int, caps: PopulationCaps = PopulationCaps(),
                      workers: int = 1, coords=(), split: int | None = SPLIT) -> SurvivalEstimate:
    """Fraction of ``replicates`` runs alive at generation ``n``.

    With ``split`` set (the default) each run is explored lazily: populations
    above ``split`` particles are halved by position and the upper half is only
    simulated if the lower half dies.  The survival indicator keeps its law and
    no population cap is needed.  ``split=None`` runs the breadth-first
    simulation under ``caps.population`` instead.
    """
    st = _setup(envseq, barrier, n, caps)
    if split is None:
        survived, truncated, _ = _population_blocks(st, n, replicates, seed, (0x53, *coords),
                                                    caps.population, workers)
        trunc = float(truncated.mean())
    else:
        blocks = block_slices(replicates, BLOCK)

        def task(b):
            start, stop = blocks[b]
            rng = (kernel_seed(seed, 0x56, *coords, b) if USE_NUMBA
                   else generator(seed, 0x56, *coords, b))
            return kernel("alive_block")(rng, stop - start, n, *st.args, st.base, st.width, split)

        survived = np.concatenate(run_blocks(task, range(len(blocks)), workers))
        trunc = 0.0
    k = int(survived.sum())
    est = McEstimate.from_moments(float(k), float(k), replicates, seed)
    return SurvivalEstimate(est, trunc)


def mean_population(envseq, barrier, n, replicates, seed, caps=PopulationCaps(), workers=1):
    """McEstimate of ``E Y_n`` together with the truncation fraction."""
    st = _setup(envseq, barrier, n, caps)
    _, truncated, final = _population_blocks(st, n, replicates, seed, (0x54,), caps.population, workers)
    return McEstimate.from_samples(final.astype(float), seed), float(truncated.mean())


def exact_survival_probability(envseq: EnvironmentSequence, barrier: BarrierSpec | None, n: int,
                               caps: PopulationCaps = PopulationCaps(),
                               vartheta: float | None = None) -> float:
    """``P(Y_n > 0)`` (or ``P(Y-hat_n > 0)``) from the backward recursion

        s_i(x) = sum_atoms p * (1 - prod_children (1 - 1{child admissible} s_{i+1}(child)))

    over the lattice of reachable positions.  The population cap is ignored.
    """
    st = _setup(envseq, barrier, n, caps, vartheta)
    return float(kernel("survival_dp")(n, *st.args, st.base, st.width))


def second_moment_bound(envseq: EnvironmentSequence, vartheta: float, barrier: BarrierSpec | None,
                        n: int, mode: str = "exhaustive", replicates: int = 10_000, seed: int = 0,
                        cap_exponent: float = 1.0 / 3.0, workers: int = 1) -> SecondMomentBound:
    """``[E Y-hat_n]^2 / E Y-hat_n^2``, a lower bound for ``P(Y-hat_n > 0)``.

    ``exhaustive`` computes both moments exactly by pairing a backward
    first-moment recursion with forward particle densities: pairs of distinct
    particles are split at their last common ancestor.  ``mc`` uses the
    empirical moments of simulated ``Y-hat_n`` and a delta-method error.
    """
    caps = PopulationCaps(yhat=True, cap_exponent=cap_exponent)
    if mode == "exhaustive":
        st = _setup(envseq, barrier, n, caps, vartheta)
        fn = kernel("moments_dp")
        m1, m2 = fn(n, *st.args, st.base, st.width)
        lb = m1 * m1 / m2 if m2 > 0 else 0.0
        return SecondMomentBound(lb, float(m1), float(m2))
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    st = _setup(envseq, barrier, n, caps, vartheta)
    _, _, final = _population_blocks(st, n, replicates, seed, (0x55,), 0, workers)
    y = final.astype(float)
    m1 = y.mean()
    m2 = (y * y).mean()
    if m2 == 0.0:
        return SecondMomentBound(0.0, 0.0, 0.0, 0.0)
    lb = m1 * m1 / m2
    # delta method on g(a, b) = a^2 / b
    cov = np.cov(np.vstack([y, y * y]), ddof=1) / y.size
    grad = np.array([2 * m1 / m2, -m1 * m1 / (m2 * m2)])
    se = float(math.sqrt(max(grad @ cov @ grad, 0.0)))
    return SecondMomentBound(float(lb), float(m1), float(m2), se)
