"""Seeded desk-scale experiments: extinction rates, phase transition, L^p moments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .criticality import AssumptionParams, assumption_report, find_critical_theta
from .environment import BarrierSpec, EnvironmentLaw, sample_environment
from .forward import SPLIT, exact_survival_probability, quenched_survival
from .streams import derive_seed


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid and budget of an extinction experiment.

    ``d = inf`` in ``d_values`` stands for "no barrier".  ``exact`` adds the
    exact survival probability of every (environment, n) as a diagnostic.
    """
    envlaw: EnvironmentLaw
    d_values: tuple = (1.5,)
    alpha_values: tuple = (1.0 / 3.0,)
    n_grid: tuple = (64, 216, 512)
    replicates: int = 10_000
    environments: int = 10
    p: float = 1.0
    seed: int = 0
    split: int = SPLIT
    exact: bool = False
    vartheta: float | None = None
    params: AssumptionParams = field(default_factory=AssumptionParams)

    def __post_init__(self):
        for name in ("d_values", "alpha_values", "n_grid"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ValueError(f"{name} must be nonempty")
            object.__setattr__(self, name, vals)
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if self.replicates < 1 or self.environments < 1:
            raise ValueError("replicates and environments must be >= 1")
        if self.vartheta is None:
            object.__setattr__(self, "vartheta", find_critical_theta(self.envlaw).vartheta)


@dataclass(frozen=True)
class RateRow:
    n: int
    env_index: int
    d: float
    alpha: float
    estimate: float
    stderr: float
    A_n: float
    censored: bool
    a_lower: float
    exact: float = math.nan


def rate_from_estimate(estimate: float, n: int) -> float:
    """``A_n = -log(estimate) / n^(1/3)``; infinite when ``estimate = 0``."""
    if estimate <= 0.0:
        return math.inf
    return 0.0 - math.log(estimate) / n ** (1.0 / 3.0)


def censored_bound(replicates: int, n: int) -> float:
    return math.log(replicates) / n ** (1.0 / 3.0)


def hypothesis_annotation(config: ExperimentConfig) -> str:
    """``in-hypothesis`` or the comma-separated list of violated conditions."""
    prof = find_critical_theta(config.envlaw)
    rep = assumption_report(config.envlaw, prof, config.params)
    bad = [k for k, v in rep.verdicts.items() if not v.ok]
    return "in-hypothesis" if not bad else "out-of-hypothesis: " + ",".join(bad)


def environment_for(config: ExperimentConfig, e: int):
    """Environment ``e``; one sequence of length ``max(n_grid)`` shared by all ``n``."""
    return sample_environment(config.envlaw, max(config.n_grid), derive_seed(config.seed, 0xE0, e))


def _barrier(config, d, alpha):
    if math.isinf(d):
        return None
    return BarrierSpec(d, alpha, config.vartheta)


def extinction_rate_experiment(config: ExperimentConfig, workers: int = 1):
    """One ``RateRow`` per (d, alpha, n, environment), in that nesting order."""
    rows = []
    envs = [environment_for(config, e) for e in range(config.environments)]
    for di, d in enumerate(config.d_values):
        for ai, alpha in enumerate(config.alpha_values):
            bar = _barrier(config, d, alpha)
            for n in config.n_grid:
                for e, env in enumerate(envs):
                    est = quenched_survival(env, bar, n, config.replicates, config.seed,
                                            workers=workers, coords=(0xA1, di, ai, n, e),
                                            split=config.split).estimate
                    a = rate_from_estimate(est.value, n)
                    cens = est.value == 0.0
                    ex = exact_survival_probability(env, bar, n) if config.exact else math.nan
                    rows.append(RateRow(n, e, float(d), float(alpha), est.value, est.stderr, a, cens,
                                        censored_bound(config.replicates, n) if cens else a, ex))
    return rows


@dataclass(frozen=True)
class RateSummary:
    d: float
    alpha: float
    n: int
    environments: int
    censored: int
    mean: float
    median: float
    spread: float


def summarize_rates(rows):
    """Per (d, alpha, n) statistics of ``A_n`` over uncensored environments."""
    out = []
    keys = []
    for r in rows:
        k = (r.d, r.alpha, r.n)
        if k not in keys:
            keys.append(k)
    for d, alpha, n in keys:
        sel = [r for r in rows if (r.d, r.alpha, r.n) == (d, alpha, n)]
        a = np.array([r.A_n for r in sel if not r.censored])
        cens = sum(r.censored for r in sel)
        if a.size:
            out.append(RateSummary(d, alpha, n, len(sel), cens, float(a.mean()), float(np.median(a)),
                                   float(a.std(ddof=1)) if a.size > 1 else 0.0))
        else:
            out.append(RateSummary(d, alpha, n, len(sel), cens, math.nan, math.nan, math.nan))
    return out


def max_pairwise_ratio(values) -> float:
    """``max / min - 1`` over positive values; the pairwise relative spread."""
    v = [x for x in values if x > 0 and math.isfinite(x)]
    if len(v) < 2:
        return math.nan
    return max(v) / min(v) - 1.0


@dataclass(frozen=True)
class LpRow:
    n: int
    moment: float
    stderr: float
    used: int
    censored: int
    zero_fraction: float


@dataclass(frozen=True)
class LpResult:
    rows: list
    slope: float
    slope_stderr: float
    t: float
    regressor: str
    rate_rows: list


def weighted_slope(x, y, se):
    """Weighted least-squares slope with known standard errors ``se``.

    Returns ``(slope, stderr, t)``.  Zero errors fall back to ordinary least
    squares with the residual variance.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    se = np.asarray(se, float)
    if x.size < 2:
        return math.nan, math.nan, math.nan
    if np.all(se > 0):
        w = 1.0 / se**2
        xb = float(w @ x / w.sum())
        sxx = float(w @ (x - xb) ** 2)
        yb = float(w @ y / w.sum())
        slope = float(w @ ((x - xb) * (y - yb))) / sxx
        s = math.sqrt(1.0 / sxx)
    else:
        xb, yb = x.mean(), y.mean()
        sxx = float(((x - xb) ** 2).sum())
        slope = float(((x - xb) * (y - yb)).sum()) / sxx
        if x.size > 2:
            res = y - yb - slope * (x - xb)
            s = math.sqrt(float(res @ res) / (x.size - 2) / sxx)
        else:
            s = 0.0
    if s == 0.0:
        return slope, 0.0, 0.0 if slope == 0.0 else math.copysign(math.inf, slope)
    return slope, s, slope / s


def lp_moment_experiment(config: ExperimentConfig, workers: int = 1, regressor: str = "n") -> LpResult:
    """Cross-environment ``E[A_n^p]`` per ``n`` and its trend against ``n``.

    Uses the first entries of ``d_values`` and ``alpha_values``.  Censored
    environments are excluded and counted; ``zero_fraction`` is their share.
    ``regressor`` is ``"n"`` or ``"cbrt"`` (``n^(1/3)``).
    """
    sub = ExperimentConfig(config.envlaw, config.d_values[:1], config.alpha_values[:1], config.n_grid,
                           config.replicates, config.environments, config.p, config.seed,
                           config.split, config.exact, config.vartheta, config.params)
    rate_rows = extinction_rate_experiment(sub, workers)
    rows = []
    for n in config.n_grid:
        sel = [r for r in rate_rows if r.n == n]
        a = np.array([r.A_n for r in sel if not r.censored])
        cens = len(sel) - a.size
        if a.size:
            ap = a**config.p
            m = float(ap.mean())
            se = float(ap.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0
        else:
            m, se = math.nan, math.nan
        rows.append(LpRow(n, m, se, int(a.size), cens, cens / len(sel)))
    ok = [r for r in rows if r.used > 0]
    if regressor == "n":
        x = [r.n for r in ok]
    elif regressor == "cbrt":
        x = [r.n ** (1.0 / 3.0) for r in ok]
    else:
        raise ValueError(f"unknown regressor {regressor!r}")
    slope, sse, t = weighted_slope(x, [r.moment for r in ok], [r.stderr for r in ok])
    return LpResult(rows, slope, sse, t, regressor, rate_rows)


@dataclass(frozen=True)
class PhaseRow:
    d: float
    alpha: float
    n: int
    frequency: float
    stderr: float
    environments: int


def phase_transition(rows):
    """Survival frequency pooled over environments for each (d, alpha, n).

    The pooled error is ``sqrt(sum se_e^2) / E``.
    """
    out = []
    keys = []
    for r in rows:
        k = (r.d, r.alpha, r.n)
        if k not in keys:
            keys.append(k)
    for d, alpha, n in keys:
        sel = [r for r in rows if (r.d, r.alpha, r.n) == (d, alpha, n)]
        f = math.fsum(r.estimate for r in sel) / len(sel)
        se = math.sqrt(math.fsum(r.stderr**2 for r in sel)) / len(sel)
        out.append(PhaseRow(d, alpha, n, f, se, len(sel)))
    return out


def pooled_stderr(a: PhaseRow, b: PhaseRow) -> float:
    return math.hypot(a.stderr, b.stderr)


def survival_regime(phase_rows, d: float, alpha: float, k: float = 3.0) -> bool:
    """Survival frequency non-decreasing along the n-grid within ``k`` pooled errors."""
    sel = sorted((r for r in phase_rows if r.d == d and r.alpha == alpha), key=lambda r: r.n)
    return all(b.frequency >= a.frequency - k * pooled_stderr(a, b) for a, b in zip(sel, sel[1:]))
