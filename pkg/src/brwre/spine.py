"""The associated walk ``T_n = K_n + vartheta chi_n`` and many-to-one estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import USE_NUMBA
from ._kernels import kernel
from .environment import EnvironmentSequence, cumulative_kappa
from .errors import BudgetExceeded
from .lattice import cap_array, ceil_cut, floor_cut, step_arrays
from .pointprocess import PointProcessLaw, laplace_profile, spine_step_law
from .streams import BLOCK, McEstimate, block_slices, generator, kernel_seed, run_blocks

DEFAULT_BUDGET = 10**7


@dataclass(frozen=True)
class SpineTrajectory:
    chi: np.ndarray
    T: np.ndarray
    xi: np.ndarray


def sample_spine(envseq: EnvironmentSequence, vartheta: float, rng: np.random.Generator,
                 n: int | None = None) -> SpineTrajectory:
    """Independent spine steps, step ``i`` from the tilted law of ``L_i``.

    Offspring caps are not applied here; estimators use them as indicators.
    """
    n = len(envseq) if n is None else n
    K = cumulative_kappa(envseq.prefix(n), vartheta)
    steps = [spine_step_law(law, vartheta) for law in envseq.source.laws]
    chi = np.zeros(n + 1)
    xi = np.zeros(n, np.int64)
    for i in range(n):
        st = steps[envseq.indices[i]]
        j = rng.choice(len(st.atoms), p=st.mass / st.mass.sum())
        chi[i + 1] = chi[i] + st.x[j]
        xi[i] = st.xi[j]
    return SpineTrajectory(chi=chi, T=K + vartheta * chi, xi=xi)


@dataclass(frozen=True)
class PathFunctional:
    """``f(chi_1..chi_n) 1{xi_i <= A_i}`` built from position windows and caps.

    ``windows[i-1] = (lo, hi)`` constrains generation ``i``; ``caps[i-1]``
    bounds the offspring count of the generation-``i-1`` parent.
    """
    n: int
    windows: tuple | None = None
    caps: tuple | None = None

    def __post_init__(self):
        if self.windows is not None:
            w = tuple((float(lo), float(hi)) for lo, hi in self.windows)
            if len(w) != self.n:
                raise ValueError(f"{len(w)} windows for n={self.n}")
            object.__setattr__(self, "windows", w)
        if self.caps is not None:
            c = tuple(float(a) for a in self.caps)
            if len(c) != self.n:
                raise ValueError(f"{len(c)} caps for n={self.n}")
            object.__setattr__(self, "caps", c)

    @classmethod
    def one(cls, n: int) -> "PathFunctional":
        return cls(n)

    @property
    def kind(self) -> str:
        if self.windows is None and self.caps is None:
            return "one"
        if self.caps is None:
            return "window"
        if self.windows is None:
            return "cap"
        return "window*cap"

    def window_at(self, i: int):
        if self.windows is None:
            return -math.inf, math.inf
        return self.windows[i - 1]

    def cap_at(self, i: int) -> float:
        return math.inf if self.caps is None else self.caps[i - 1]

    def integer_windows(self, scale: int):
        """``(klo, khi)`` index arrays of length ``n + 1`` on the scaled lattice."""
        lo = np.array([-math.inf] + [self.window_at(i)[0] for i in range(1, self.n + 1)])
        hi = np.array([math.inf] + [self.window_at(i)[1] for i in range(1, self.n + 1)])
        return ceil_cut(lo, scale), floor_cut(hi, scale)


def tilt_relation(law: PointProcessLaw, vartheta: float, lam: float):
    """``E exp(lam chi_1)`` from the spine atoms and from ``exp(kappa(vartheta-lam) - kappa(vartheta))``."""
    step = spine_step_law(law, vartheta)
    direct = math.fsum(m * math.exp(lam * float(x)) for x, _, m in step.atoms)
    closed = math.exp(laplace_profile(law, vartheta - lam).kappa - laplace_profile(law, vartheta).kappa)
    return direct, closed


def _spine_setup(envseq, vartheta, functional: PathFunctional):
    n = functional.n
    if len(envseq) < n:
        raise ValueError(f"environment has length {len(envseq)} < n={n}")
    env = envseq.prefix(n)
    scale = env.source.denominator
    start, x, xi, mass, cdf = step_arrays(env.source, vartheta, scale)
    klo, khi = functional.integer_windows(scale)
    cap = cap_array(functional.caps, n)
    return env, scale, (env.indices, start, x, xi, cdf, klo, khi, cap)


def spine_endpoints(envseq, vartheta, functional: PathFunctional, replicates: int, seed: int,
                    workers: int = 1, coords=()):
    """Scaled ``chi_n`` and the indicator ``f * 1{xi <= A}`` for each replicate."""
    env, scale, args = _spine_setup(envseq, vartheta, functional)
    n = functional.n
    blocks = block_slices(replicates, BLOCK)

    def task(b):
        start, stop = blocks[b]
        rng = kernel_seed(seed, *coords, b) if USE_NUMBA else generator(seed, *coords, b)
        return kernel("spine_block")(rng, stop - start, n, *args)

    parts = run_blocks(task, range(len(blocks)), workers)
    chi = np.concatenate([p[0] for p in parts])
    ok = np.concatenate([p[1] for p in parts])
    return chi, ok, scale


def many_to_one_estimate(envseq: EnvironmentSequence, vartheta: float, functional: PathFunctional,
                         replicates: int, seed: int, workers: int = 1) -> McEstimate:
    """Monte Carlo mean of ``exp(T_n) f(chi) 1{xi <= A}`` over spine paths.

    ``exp(T_n)`` is formed in log space and rescaled by its maximum before
    summing, so moderately long paths do not overflow.  At the critical tilt
    the weights are heavy-tailed for long paths and the sample standard error
    understates the error; the exhaustive oracle is exact there.
    """
    n = functional.n
    chi, ok, scale = spine_endpoints(envseq, vartheta, functional, replicates, seed, workers, (0x61,))
    K_n = cumulative_kappa(envseq.prefix(n), vartheta)[-1]
    logw = np.where(ok, K_n + vartheta * chi / scale, -np.inf)
    if not np.any(ok):
        return McEstimate(0.0, 0.0, replicates, seed)
    top = float(logw.max())
    w = np.exp(logw - top)
    est = McEstimate.from_moments(float(w.sum()), float((w * w).sum()), replicates, seed)
    f = math.exp(top)
    return McEstimate(est.value * f, est.stderr * f, replicates, seed)


def genealogy_states(envseq: EnvironmentSequence, n: int) -> int:
    """Number of lineage states the genealogy walk visits for ``n`` generations."""
    total = 0
    level = 1
    for i in range(n):
        law = envseq.law_at(i + 1)
        level *= sum(a.n_children for a in law.atoms)
        total += level
    return total


def _genealogy(envseq, functional, budget):
    n = functional.n
    states = genealogy_states(envseq, n)
    if states > budget:
        raise BudgetExceeded(states, budget)
    scale = envseq.source.denominator
    klo, khi = functional.integer_windows(scale)
    leaves = []
    # explicit stack of (generation, scaled position, lineage weight)
    stack = [(0, 0, 1.0)]
    while stack:
        i, v, w = stack.pop()
        if i == n:
            leaves.append(w)
            continue
        law = envseq.law_at(i + 1)
        cap = functional.cap_at(i + 1)
        for atom in law.atoms:
            if atom.n_children > cap:
                continue
            for d in atom.displacements:
                u = v + int(d * scale)
                if klo[i + 1] <= u <= khi[i + 1]:
                    stack.append((i + 1, u, w * atom.probability))
    return math.fsum(leaves)


def _spine_dp(envseq, vartheta, functional):
    n = functional.n
    scale = envseq.source.denominator
    klo, khi = functional.integer_windows(scale)
    steps = [spine_step_law(law, vartheta) for law in envseq.source.laws]
    # log masses: large tilts push tilted masses into the subnormal range
    logm = {0: 0.0}
    for i in range(1, n + 1):
        st = steps[envseq.indices[i - 1]]
        cap = functional.cap_at(i)
        nxt: dict = {}
        for k, lm in logm.items():
            for x, xi, p in st.atoms:
                if xi > cap or p <= 0.0:
                    continue
                u = k + int(x * scale)
                if klo[i] <= u <= khi[i]:
                    v = lm + math.log(p)
                    nxt[u] = np.logaddexp(nxt[u], v) if u in nxt else v
        logm = nxt
    if not logm:
        return 0.0
    K_n = cumulative_kappa(envseq.prefix(n), vartheta)[-1]
    logs = [lm + K_n + vartheta * k / scale for k, lm in logm.items()]
    top = max(logs)
    return float(math.exp(top) * math.fsum(math.exp(v - top) for v in logs))


def exhaustive_oracle(envseq: EnvironmentSequence, vartheta: float, functional: PathFunctional,
                      mode: str = "spine-dp", budget: int = DEFAULT_BUDGET) -> float:
    """Exact value of either side of the many-to-one identity.

    ``genealogy`` walks every lineage of the untilted point processes and
    sums ``E sum_{|u|=n} f(V(u_i)) 1{N(u_{i-1}) <= A_i}``, one state per
    lineage prefix; it refuses when the state count exceeds ``budget``.
    ``spine-dp`` propagates the tilted step masses on the chi lattice and
    returns ``E[exp(T_n) f(chi) 1{xi <= A}]``.
    """
    if len(envseq) < functional.n:
        raise ValueError(f"environment has length {len(envseq)} < n={functional.n}")
    if mode == "genealogy":
        return _genealogy(envseq, functional, budget)
    if mode == "spine-dp":
        return _spine_dp(envseq, vartheta, functional)
    raise ValueError(f"unknown oracle mode {mode!r}")
