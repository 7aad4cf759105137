"""The associated walk as a random walk in a time-varying random environment.

Corridor probabilities run on the chi lattice: positions are integer indices,
and the real-valued boundaries for ``T_i = K_i + vartheta chi_i`` become
per-step integer cuts.  No approximation of the step law is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import USE_NUMBA
from ._kernels import kernel
from .criticality import dispersion_params
from .environment import EnvironmentLaw, EnvironmentSequence, cumulative_kappa, sample_environment
from .errors import NonLatticeError
from .lattice import cap_array, ceil_cut, floor_cut, step_arrays
from .pointprocess import as_fraction, laplace_profile, spine_step_law
from .streams import BLOCK, McEstimate, block_slices, derive_seed, generator, kernel_seed, run_blocks

BROWNIAN_GAMMA0 = math.pi**2 / 2.0


@dataclass(frozen=True)
class LatticeWalk:
    """Walk with value ``shift[i] + gain * k_i`` where ``k_i`` is an integer
    lattice index moved by the step law of component ``comp[i]``.
    """
    comp: np.ndarray
    shift: np.ndarray
    gain: float
    start: np.ndarray
    x: np.ndarray
    xi: np.ndarray
    mass: np.ndarray
    cdf: np.ndarray

    def __len__(self):
        return int(self.comp.size)

    @classmethod
    def from_environment(cls, envseq: EnvironmentSequence, vartheta: float) -> "LatticeWalk":
        scale = envseq.source.denominator
        start, x, xi, mass, cdf = step_arrays(envseq.source, vartheta, scale)
        return cls(envseq.indices, cumulative_kappa(envseq, vartheta), vartheta / scale,
                   start, x, xi, mass, cdf)

    @classmethod
    def from_step_law(cls, values, probs, n: int) -> "LatticeWalk":
        """I.i.d. steps with rational ``values``; offspring counts are set to 1."""
        fr = [as_fraction(v) for v in values]
        scale = 1
        for f in fr:
            scale = math.lcm(scale, f.denominator)
        probs = np.asarray(probs, float)
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("step probabilities must sum to 1")
        order = np.argsort([float(f) for f in fr])
        x = np.array([int(fr[i] * scale) for i in order], np.int64)
        mass = probs[order]
        cdf = np.cumsum(mass)
        cdf[-1] = 1.0
        return cls(np.zeros(n, np.int64), np.zeros(n + 1), 1.0 / scale,
                   np.array([0, x.size], np.int64), x, np.ones(x.size, np.int64), mass, cdf)

    def window(self, t0: int, n: int):
        return self.comp[t0:t0 + n], self.shift[t0:t0 + n + 1] - self.shift[t0]

    def step_moments(self, order: float = 2.0):
        """Per-component (mean, variance, E|step - mean|^order) of the value increment."""
        out = []
        for c in range(self.start.size - 1):
            s0, s1 = self.start[c], self.start[c + 1]
            v = self.gain * self.x[s0:s1]
            m = self.mass[s0:s1]
            mu = float(m @ v)
            out.append((mu, float(m @ (v - mu) ** 2), float(m @ np.abs(v - mu) ** order)))
        return out


def _bound(b, n):
    arr = np.asarray(b, float)
    if arr.ndim == 0:
        return np.full(n + 1, float(arr))
    if arr.size == n:
        return np.concatenate([[arr[0]], arr])
    if arr.size != n + 1:
        raise ValueError(f"boundary has {arr.size} entries, expected n or n+1 with n={n}")
    return arr


@dataclass(frozen=True)
class CorridorSpec:
    """Event ``{lower_i <= S_i <= upper_i, i <= n; S_n in terminal; xi_i <= cap_i}``
    for ``S_i = x + T_{t0+i} - T_{t0}``.

    ``lower``/``upper`` are scalars or sequences over ``i = 0..n`` (or
    ``1..n``, in which case step 0 reuses the first entry).
    """
    n: int
    lower: object
    upper: object
    terminal: tuple = (-math.inf, math.inf)
    xi_cap: object = None
    x: float = 0.0
    t0: int = 0

    def bounds(self):
        lo = _bound(self.lower, self.n).copy()
        hi = _bound(self.upper, self.n).copy()
        if np.any(lo > hi):
            raise ValueError("corridor has lower > upper")
        lo[-1] = max(lo[-1], self.terminal[0])
        hi[-1] = min(hi[-1], self.terminal[1])
        return lo, hi

    @classmethod
    def symmetric(cls, n: int, half_width: float, **kw) -> "CorridorSpec":
        return cls(n, -half_width, half_width, **kw)


def _cuts(walk: LatticeWalk, spec: CorridorSpec, x: float):
    comp, dshift = walk.window(spec.t0, spec.n)
    if comp.size < spec.n:
        raise ValueError(f"walk has {len(walk)} steps, corridor needs t0 + n = {spec.t0 + spec.n}")
    lo, hi = spec.bounds()
    klo = ceil_cut((lo - dshift - x) / walk.gain, 1)
    khi = floor_cut((hi - dshift - x) / walk.gain, 1)
    return comp, klo, khi, cap_array(spec.xi_cap, spec.n)


def _check_lattice(walk: LatticeWalk, x: float):
    if not math.isfinite(x) or not math.isfinite(walk.gain) or walk.gain <= 0:
        raise NonLatticeError(f"start {x!r} or lattice gain {walk.gain!r} is not usable")


def corridor_log_probability(walk: LatticeWalk, spec: CorridorSpec) -> float:
    """``log P(corridor event | S_0 = x)`` by the absorbing forward recursion."""
    _check_lattice(walk, spec.x)
    comp, klo, khi, cap = _cuts(walk, spec, spec.x)
    maxw = int(max(1, (khi - klo).max() + 1))
    return float(kernel("corridor_forward")(spec.n, comp, walk.start, walk.x, walk.xi, walk.mass,
                                            klo, khi, cap, maxw))


def corridor_probability(walk: LatticeWalk, spec: CorridorSpec, mode: str = "exact",
                         replicates: int = 10_000, seed: int = 0, workers: int = 1):
    """Probability of the corridor event: a float (``exact``) or McEstimate (``mc``)."""
    if mode == "exact":
        return math.exp(corridor_log_probability(walk, spec))
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    comp, klo, khi, cap = _cuts(walk, spec, spec.x)
    if not klo[0] <= 0 <= khi[0]:
        return McEstimate(0.0, 0.0, replicates, seed)
    blocks = block_slices(replicates, BLOCK)

    def task(b):
        start, stop = blocks[b]
        rng = kernel_seed(seed, 0x71, b) if USE_NUMBA else generator(seed, 0x71, b)
        return kernel("spine_block")(rng, stop - start, spec.n, comp, walk.start, walk.x, walk.xi,
                                     walk.cdf, klo, khi, cap)[1]

    ok = np.concatenate(run_blocks(task, range(len(blocks)), workers))
    k = float(ok.sum())
    return McEstimate.from_moments(k, k, replicates, seed)


def corridor_start_profile(walk: LatticeWalk, spec: CorridorSpec):
    """``(starts, log P)`` for every lattice-aligned start ``x = gain * k`` in
    the step-0 window, from one backward recursion (``spec.x`` is ignored).
    """
    comp, klo, khi, cap = _cuts(walk, spec, 0.0)
    if khi[0] < klo[0]:
        return np.zeros(0), np.zeros(0)
    maxw = int(max(1, (khi - klo).max() + 1))
    logp = kernel("corridor_backward")(spec.n, comp, walk.start, walk.x, walk.xi, walk.mass,
                                       klo, khi, cap, maxw)
    starts = walk.gain * np.arange(klo[0], khi[0] + 1)
    return starts, np.asarray(logp)


def corridor_extremes(walk: LatticeWalk, spec: CorridorSpec, x_lo=-math.inf, x_hi=math.inf):
    """``(inf, sup)`` of ``log P`` over lattice-aligned starts in ``[x_lo, x_hi]``."""
    starts, logp = corridor_start_profile(walk, spec)
    sel = (starts >= x_lo - 1e-12) & (starts <= x_hi + 1e-12)
    if not np.any(sel):
        return -math.inf, -math.inf
    return float(logp[sel].min()), float(logp[sel].max())


# --------------------------------------------------------------------------
# mean / fluctuation decomposition and regeneration times


@dataclass(frozen=True)
class WalkDecomposition:
    M: np.ndarray
    Gamma: np.ndarray
    psi: np.ndarray


def _component_moments(envlaw: EnvironmentLaw, vartheta: float, lambda2: float):
    out = []
    for law in envlaw.laws:
        prof = laplace_profile(law, vartheta)
        step = spine_step_law(law, vartheta)
        centred = vartheta * (step.x + prof.d1)
        out.append((prof.kappa - vartheta * prof.d1, vartheta**2 * prof.d2,
                    float(step.mass @ np.abs(centred) ** lambda2)))
    return np.array(out)


def walk_decomposition(envseq: EnvironmentSequence, vartheta: float, lambda2: float = 4.0) -> WalkDecomposition:
    """``M_i = E T_i``, ``Gamma_i = Var T_i`` and ``psi_i = sum_k E|U_k - U_{k-1}|^lambda2``."""
    mom = _component_moments(envseq.source, vartheta, lambda2)[envseq.indices]
    z = np.zeros(1)
    return WalkDecomposition(np.concatenate([z, np.cumsum(mom[:, 0])]),
                             np.concatenate([z, np.cumsum(mom[:, 1])]),
                             np.concatenate([z, np.cumsum(mom[:, 2])]))


@dataclass(frozen=True)
class RegenerationConstants:
    c3: float | None = None
    lambda4: float = 1.0
    c2: float = 10.0
    lambda2: float = 4.0
    e_psi1: float | None = None

    def q_n(self, n: int) -> float:
        return n / (self.c2 * math.log(n))


@dataclass(frozen=True)
class RegenerationStructure:
    tau: tuple
    rho: tuple
    N_n: int
    delta: float
    flags: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)


def regeneration_times(M, n: int, delta: float):
    """``tau_0 = 0``, ``tau_k = min(first i > tau_{k-1} with |M_i - M_{tau_{k-1}}| > delta sqrt(n), minus 1;
    tau_{k-1} + n)``, continued until ``tau_k > n``.

    An exceedance right after ``tau_{k-1}`` would give ``tau_k = tau_{k-1}``;
    the index is advanced by one step in that case so ``tau`` stays increasing.
    Exceedances beyond the supplied ``M`` count as absent.
    """
    M = np.asarray(M, float)
    thr = delta * math.sqrt(n)
    tau = [0]
    while tau[-1] <= n:
        t = tau[-1]
        seg = np.abs(M[t + 1:t + n + 1] - M[t]) > thr
        hit = int(np.argmax(seg)) + t + 1 if seg.any() else None
        nxt = t + n if hit is None else min(hit - 1, t + n)
        tau.append(max(nxt, t + 1))
    rho = tuple(b - a for a, b in zip(tau, tau[1:]))
    N_n = max(k for k, t in enumerate(tau) if t <= n and k <= n)
    return tuple(tau), rho, N_n


def regeneration_structure(M, n: int, delta: float = 0.1, envseq: EnvironmentSequence | None = None,
                           vartheta: float | None = None,
                           constants: RegenerationConstants = RegenerationConstants()) -> RegenerationStructure:
    """Regeneration times of ``M`` plus the diagnostic environment events.

    With ``envseq`` (length >= 2n) and ``vartheta`` the flags H, J, J~, I and
    their conjunction Q are evaluated; ``H`` only sees the regeneration gaps
    that fit in the supplied ``M``.
    """
    tau, rho, N_n = regeneration_times(M, n, delta)
    flags: dict = {}
    used: dict = {}
    if envseq is not None and vartheta is not None:
        envlaw = envseq.source
        _, s2s = dispersion_params(envlaw, vartheta)
        c3 = s2s / 2024.0 if constants.c3 is None else constants.c3
        q_n = constants.q_n(n)
        q_star = math.ceil(n / q_n) ** 2
        mom = _component_moments(envlaw, vartheta, constants.lambda2)
        e_psi1 = float(envlaw.weights @ mom[:, 2]) if constants.e_psi1 is None else constants.e_psi1
        m = min(len(envseq), 2 * n)
        dec = walk_decomposition(envseq.prefix(m), vartheta, constants.lambda2)
        i = np.arange(m + 1)
        flags["H"] = bool(min(rho[:q_star]) >= q_n)
        flags["J"] = bool(np.max(np.abs(dec.Gamma - s2s * i)) <= c3 * q_n)
        flags["J~"] = bool(dec.psi[-1] <= 3.0 * e_psi1 * n)
        lam4 = constants.lambda4
        nmax = max(sum(a.probability * a.n_children ** (1.0 + lam4) for a in envseq.law_at(j).atoms)
                   for j in range(1, min(n, len(envseq)) + 1))
        tilt = max(vartheta / (vartheta + lam4) * laplace_profile(envseq.law_at(j), vartheta + lam4).kappa
                   - laplace_profile(envseq.law_at(j), vartheta).kappa
                   for j in range(1, min(n, len(envseq)) + 1))
        flags["I"] = bool(nmax <= math.exp(lam4 * math.sqrt(n) / 3.0)
                          and tilt <= lam4**2 * math.sqrt(n) / (3.0 * (vartheta + lam4)))
        flags["Q"] = flags["H"] and flags["J"] and flags["J~"] and flags["I"]
        used = {"c3": c3, "q_n": q_n, "q_star": q_star, "lambda4": lam4, "e_psi1": e_psi1,
                "sigma2_star": s2s}
    return RegenerationStructure(tau, rho, N_n, delta, flags, used)


def regeneration_tail(envlaw: EnvironmentLaw, vartheta: float, n: int, environments: int,
                      seed: int, delta: float = 0.1):
    """Counts of ``N_n`` over sampled environments; returns ``(values, P(N_n >= m) for m = 1..max)``."""
    vals = []
    for e in range(environments):
        env = sample_environment(envlaw, 2 * n, derive_seed(seed, 0x72, e))
        M = walk_decomposition(env, vartheta).M
        vals.append(regeneration_times(M, n, delta)[2])
    vals = np.array(vals)
    tail = np.array([(vals >= m).mean() for m in range(1, vals.max() + 1)])
    return vals, tail


# --------------------------------------------------------------------------
# small deviation rates


def brownian_corridor_rate(sigma2: float, b1: float, b2: float) -> float:
    """``-sigma^2 gamma(0) / (b2 - b1)^2`` with ``gamma(0) = pi^2 / 2``."""
    return -sigma2 * BROWNIAN_GAMMA0 / (b2 - b1) ** 2


@dataclass(frozen=True)
class RateRow:
    n: int
    y_n: float
    env_index: int
    log_p: float
    normalized_rate: float
    mode: str


def small_deviation_rate(envlaw: EnvironmentLaw | None, vartheta: float | None, b1: float, b2: float,
                         a: tuple = (-0.5, 0.5), a_prime: tuple = (-0.5, 0.5), y_exponent: float = 1 / 3,
                         n_grid=(64, 216, 512), environments: int = 10, seed: int = 0,
                         mode: str = "exact", path_replicates: int = 10_000, step_law=None,
                         workers: int = 1):
    """Per-environment ``log p / (n y_n^-2)`` for the sup-form and the
    inf-with-terminal-window form of the corridor probability.

    ``step_law=(values, probs)`` replaces the environment by i.i.d. steps.
    Corridors are ``[b1 y_n, b2 y_n]`` with ``y_n = n^y_exponent``.
    """
    rows = []
    for n in n_grid:
        y = n**y_exponent
        norm = n / y**2
        for e in range(environments):
            if step_law is not None:
                walk = LatticeWalk.from_step_law(step_law[0], step_law[1], n)
            else:
                env = sample_environment(envlaw, n, derive_seed(seed, 0x73, e))
                walk = LatticeWalk.from_environment(env, vartheta)
            free = CorridorSpec(n, b1 * y, b2 * y)
            term = CorridorSpec(n, b1 * y, b2 * y, terminal=(a_prime[0] * y, a_prime[1] * y))
            if mode == "exact":
                _, up = corridor_extremes(walk, free)
                lo, _ = corridor_extremes(walk, term, a[0] * y, a[1] * y)
            else:
                # mc: the sup is taken at the corridor midpoint, the inf at the lower start edge
                mid = 0.5 * (b1 + b2) * y
                up_est = corridor_probability(walk, CorridorSpec(n, b1 * y, b2 * y, x=mid), "mc",
                                              path_replicates, derive_seed(seed, 0x74, n, e), workers)
                lo_est = corridor_probability(walk, CorridorSpec(n, b1 * y, b2 * y, x=a[0] * y,
                                                                 terminal=term.terminal),
                                              "mc", path_replicates, derive_seed(seed, 0x75, n, e), workers)
                up = math.log(up_est.value) if up_est.value > 0 else -math.inf
                lo = math.log(lo_est.value) if lo_est.value > 0 else -math.inf
            rows.append(RateRow(n, y, e, up, up / norm, f"{mode}:upper0"))
            rows.append(RateRow(n, y, e, lo, lo / norm, f"{mode}:lower0"))
    return rows


def rate_summary(rows):
    """``{(n, form): (mean, median, std, count)}`` of finite normalized rates."""
    out = {}
    keys = sorted({(r.n, r.mode) for r in rows})
    for key in keys:
        v = np.array([r.normalized_rate for r in rows if (r.n, r.mode) == key])
        v = v[np.isfinite(v)]
        if v.size:
            out[key] = (float(v.mean()), float(np.median(v)), float(v.std()), int(v.size))
        else:
            out[key] = (-math.inf, -math.inf, 0.0, 0)
    return out
