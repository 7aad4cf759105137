"""Annealed log-Laplace analysis: critical tilt, dispersion constants,
hypothesis checks for finite environments, and the two-environment example
family.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .environment import EnvironmentLaw
from .errors import ExampleRejected, InvalidLawError, NoCriticalTilt
from .pointprocess import PointProcessLaw, laplace_profile, spine_step_law, window_mass

ROOT_TOL = 1e-10
THETA_LO = 1e-6
THETA_CEILING = 1e6


def annealed_profile(envlaw: EnvironmentLaw, theta: float):
    """Weight-averaged ``(kappa, kappa', kappa'')`` at ``theta``."""
    k0 = k1 = k2 = 0.0
    for j, (w, law) in enumerate(envlaw.components):
        prof = laplace_profile(law, theta)
        if not (math.isfinite(prof.kappa) and math.isfinite(prof.d1) and math.isfinite(prof.d2)):
            raise InvalidLawError(f"component {j} is not finite at theta={theta}")
        k0 += w * prof.kappa
        k1 += w * prof.d1
        k2 += w * prof.d2
    return k0, k1, k2


def root_function(envlaw: EnvironmentLaw, theta: float) -> float:
    """``kappa(theta) - theta kappa'(theta)``; strictly decreasing in theta."""
    k0, k1, _ = annealed_profile(envlaw, theta)
    return k0 - theta * k1


@dataclass(frozen=True)
class CriticalProfile:
    vartheta: float
    kappa0: float
    kappa_at: float
    kappa_prime: float
    kappa_second: float
    sigma2: float
    sigma2_star: float

    @property
    def speed(self) -> float:
        """First-order velocity of the minimal position, ``-kappa(vartheta)/vartheta``."""
        return -self.kappa_at / self.vartheta


def find_critical_theta(envlaw: EnvironmentLaw, tol: float = ROOT_TOL) -> CriticalProfile:
    """Solve ``kappa(theta) = theta kappa'(theta)`` by bracketing bisection."""
    kappa0 = annealed_profile(envlaw, 0.0)[0]
    if not kappa0 > 0.0:
        raise NoCriticalTilt(f"kappa(0) = {kappa0:.6g} <= 0: the underlying process is not supercritical")
    # f decreases to sum_k w_k log a_1^(k); without a negative limit there is no root
    limit = math.fsum(w * math.log(law.coefficients[0][1]) for w, law in envlaw.components if w > 0)
    if limit >= 0.0:
        raise NoCriticalTilt(
            "no critical tilt: kappa(theta) - theta kappa'(theta) decreases to "
            f"E log a_1 = {limit:.6g} >= 0 (mass at the minimal displacement is not subcritical)")
    lo = THETA_LO
    f_lo = root_function(envlaw, lo)
    if f_lo <= 0.0:
        raise NoCriticalTilt("root function is not positive at the lower bracket")
    hi = 1.0
    f_hi = root_function(envlaw, hi)
    while f_hi >= 0.0:
        lo, f_lo = hi, f_hi
        hi *= 2.0
        if hi > THETA_CEILING:
            raise NoCriticalTilt(
                "no critical tilt (subcritical mass at the minimal displacement): "
                f"kappa(theta) - theta kappa'(theta) stays >= 0 up to theta = {THETA_CEILING:g}"
            )
        f_hi = root_function(envlaw, hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if root_function(envlaw, mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4e-16 * max(1.0, mid):
            break
    vartheta = 0.5 * (lo + hi)
    if abs(root_function(envlaw, vartheta)) > tol:
        raise NoCriticalTilt(f"bisection stalled with residual {root_function(envlaw, vartheta):.3g}")
    k_at, k1, k2 = annealed_profile(envlaw, vartheta)
    s2, s2s = dispersion_params(envlaw, vartheta)
    return CriticalProfile(vartheta, kappa0, k_at, k1, k2, s2, s2s)


def dispersion_params(envlaw: EnvironmentLaw, vartheta: float):
    """``(sigma^2, sigma_*^2)``: spread of the spine-step mean and mean spine-step variance."""
    s2 = 0.0
    s2s = 0.0
    for w, law in envlaw.components:
        prof = laplace_profile(law, vartheta)
        drift = prof.kappa - vartheta * prof.d1
        s2 += w * drift * drift
        s2s += w * vartheta * vartheta * prof.d2
    return s2, s2s


# --------------------------------------------------------------------------
# hypothesis report


SATISFIED = "satisfied"
VIOLATED = "violated"
NOT_APPLICABLE = "not-applicable"

LAMBDA5_SCAN = tuple(-(2.0**k) for k in range(11))


@dataclass(frozen=True)
class AssumptionParams:
    lambda0: float = 8.0
    lambda1: float = 4.0
    lambda2: float = 64.0
    lambda3: float = 8.0
    lambda4: float = 1.0
    lambda5: float | None = None
    lambda6: float = 1.5
    p: float | None = 1.0
    t: float | None = 2.0


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status != VIOLATED


@dataclass(frozen=True)
class AssumptionReport:
    verdicts: dict
    lambda5: float | None
    qqq_flagged: bool

    @property
    def all_satisfied(self) -> bool:
        return all(v.status == SATISFIED for v in self.verdicts.values())

    def status(self, key: str) -> str:
        return self.verdicts[key].status

    def format(self) -> str:
        width = max(len(k) for k in self.verdicts)
        rows = []
        for key, v in self.verdicts.items():
            wit = ", ".join(f"{k}={_fmt(x)}" for k, x in v.witness.items())
            rows.append(f"{key:<{width}}  {v.status:<14}  {wit}")
        return "\n".join(rows)

    def records(self):
        """``(condition, status, witness-string)`` rows."""
        for key, v in self.verdicts.items():
            wit = ";".join(f"{k}={_fmt(x)}" for k, x in v.witness.items())
            yield key, v.status, wit


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (list, tuple)):
        return "[" + " ".join(_fmt(y) for y in x) + "]"
    return str(x)


def _window_masses(envlaw, vartheta, lam5, upper):
    out = []
    for law in envlaw.laws:
        kap = laplace_profile(law, vartheta).kappa
        lo, hi = (0.0, abs(lam5)) if upper else (lam5, 1.0 / lam5)
        out.append(window_mass(law, vartheta, kap, lo, hi, max_n=abs(lam5)))
    return out


def _log_minus_moment(weights, masses, power):
    total = 0.0
    for w, m in zip(weights, masses):
        if w == 0.0:
            continue
        if m <= 0.0:
            return math.inf
        total += w * abs(math.log(min(m, 1.0))) ** power
    return total


def feasible_lambda5(envlaw: EnvironmentLaw, vartheta: float):
    """First ``lambda5`` in ``-1, -2, ..., -2^10`` with every window mass positive."""
    for lam5 in LAMBDA5_SCAN:
        lower = _window_masses(envlaw, vartheta, lam5, upper=False)
        upper = _window_masses(envlaw, vartheta, lam5, upper=True)
        if min(lower) > 0.0 and min(upper) > 0.0:
            return lam5
    return None


def qqq_components(envlaw: EnvironmentLaw, vartheta: float):
    """Indices of positive-weight components that place no child at or below
    ``-kappa_1(vartheta)/vartheta``, i.e. ``vartheta zeta + kappa_1 > 0`` for all children.
    """
    bad = []
    for j, (w, law) in enumerate(envlaw.components):
        if w == 0.0:
            continue
        kap = laplace_profile(law, vartheta).kappa
        lowest = min(vartheta * float(b) + kap for b in law.distinct_displacements())
        if lowest > 0.0:
            bad.append(j)
    return bad


def assumption_report(envlaw: EnvironmentLaw, profile: CriticalProfile,
                      params: AssumptionParams = AssumptionParams()) -> AssumptionReport:
    """Evaluate every moment and tail hypothesis on a finite environment.

    Moment conditions reduce to finitely many atom sums, so each verdict is
    decided exactly; the witness values are the sums themselves.
    """
    th = profile.vartheta
    w = envlaw.weights
    prof = [laplace_profile(law, th) for law in envlaw.laws]
    prof_up = [laplace_profile(law, th + params.lambda4) for law in envlaw.laws]
    v = {}

    f_at = profile.kappa_at - th * profile.kappa_prime
    ok2 = profile.kappa0 > 0.0 and abs(f_at) <= 1e-8 and th > 0.0
    v["eq2"] = Verdict(SATISFIED if ok2 else VIOLATED,
                       {"vartheta": th, "kappa0": profile.kappa0, "residual": f_at})

    drift = np.array([p.kappa - th * p.d1 for p in prof])
    m3 = float(w @ np.abs(drift) ** params.lambda0)
    v["eq3"] = Verdict(SATISFIED if math.isfinite(m3) else VIOLATED, {"moment": m3})

    ratios = []
    for law, p in zip(envlaw.laws, prof):
        step = spine_step_law(law, th)
        ratios.append(float(step.mass @ np.abs(step.x + p.d1) ** params.lambda2))
    m4 = float(w @ np.array(ratios) ** params.lambda1)
    v["eq4"] = Verdict(SATISFIED if math.isfinite(m4) else VIOLATED, {"moment": m4})

    k_up = np.array([p.kappa for p in prof_up])
    k_at = np.array([p.kappa for p in prof])
    n_mom = np.array([sum(a.probability * a.n_children ** (1.0 + params.lambda4) for a in law.atoms)
                      for law in envlaw.laws])
    m6a = float(w @ np.abs(k_up) ** params.lambda3 + w @ np.abs(k_at) ** params.lambda3)
    m6b = float(w @ np.log(np.maximum(n_mom, 1.0)) ** params.lambda3)
    ok6 = math.isfinite(m6a) and math.isfinite(m6b)
    v["eq6"] = Verdict(SATISFIED if ok6 else VIOLATED, {"kappa_moment": m6a, "log_n_moment": m6b})

    lam5 = params.lambda5 if params.lambda5 is not None else feasible_lambda5(envlaw, th)
    bad = qqq_components(envlaw, th)
    qqq = bool(bad)
    if lam5 is None:
        # no scanned lambda5 works; report the widest window tried
        lam5_eval = LAMBDA5_SCAN[-1]
    else:
        lam5_eval = lam5
    lower = _window_masses(envlaw, th, lam5_eval, upper=False)
    upper = _window_masses(envlaw, th, lam5_eval, upper=True)
    t_lo = _log_minus_moment(w, lower, params.lambda6)
    t_hi = _log_minus_moment(w, upper, params.lambda6)
    v["T<"] = Verdict(SATISFIED if math.isfinite(t_lo) else VIOLATED,
                      {"lambda5": lam5_eval, "masses": lower, "moment": t_lo})
    v["T>"] = Verdict(SATISFIED if math.isfinite(t_hi) else VIOLATED,
                      {"lambda5": lam5_eval, "masses": upper, "moment": t_hi})
    v["qqq"] = Verdict(VIOLATED if qqq else SATISFIED, {"components": bad})

    ratio = profile.sigma2 / profile.sigma2_star if profile.sigma2_star > 0 else math.inf
    bound = (params.lambda2 - 2.0) / (params.lambda0 - 2.0)
    v["ratio"] = Verdict(SATISFIED if ratio < bound else VIOLATED,
                         {"sigma2": profile.sigma2, "sigma2_star": profile.sigma2_star,
                          "ratio": ratio, "bound": bound})

    ranges = (params.lambda0 > 3 and params.lambda1 > 2 and params.lambda2 > 2 and params.lambda3 > 3
              and params.lambda4 > 0 and lam5_eval <= -1 and params.lambda6 >= 1)
    v["ranges"] = Verdict(SATISFIED if ranges else VIOLATED,
                          {"lambda0": params.lambda0, "lambda1": params.lambda1,
                           "lambda2": params.lambda2, "lambda3": params.lambda3,
                           "lambda4": params.lambda4, "lambda6": params.lambda6})

    if params.p is None or params.t is None:
        v["moment_order"] = Verdict(NOT_APPLICABLE)
    else:
        p, t, l6 = params.p, params.t, params.lambda6
        ok = (p >= 1 and t >= 1 and t * l6 >= 2 and l6 - 1.0 / t <= p < l6
              and min(params.lambda0 / 2, params.lambda1, params.lambda3 / 2) > l6 / (l6 - p))
        v["moment_order"] = Verdict(SATISFIED if ok else VIOLATED, {"p": p, "t": t})

    return AssumptionReport(verdicts=v, lambda5=lam5, qqq_flagged=qqq)


# --------------------------------------------------------------------------
# two-environment example family


def _coeff_arrays(law: PointProcessLaw):
    b = np.array([float(x) for x, _ in law.coefficients])
    a = np.array([w for _, w in law.coefficients])
    return a, b


def example_lambda(law: PointProcessLaw, theta: float) -> float:
    """``log L(theta) - theta L'(theta)/L(theta)`` for one environment."""
    p = laplace_profile(law, theta)
    return p.kappa - theta * p.d1


def example_tau(law: PointProcessLaw, theta: float) -> float:
    """``theta b_1 + log L(theta)`` with ``b_1`` the smallest displacement."""
    _, b = _coeff_arrays(law)
    return theta * b[0] + laplace_profile(law, theta).kappa


def leading_coefficient(law: PointProcessLaw) -> float:
    """``a_1``: expected number of children at the smallest displacement."""
    return law.coefficients[0][1]


def two_env_example(p: float, law_a: PointProcessLaw, law_b: PointProcessLaw) -> EnvironmentLaw:
    """Mixture ``p delta_A + (1-p) delta_B`` after checking the five common steps."""
    if not (0.0 <= p <= 1.0):
        raise ExampleRejected(1, f"p={p} is not a probability")
    for name, law in (("A", law_a), ("B", law_b)):
        if law.max_offspring > 2024:
            raise ExampleRejected(2, f"law {name} allows N = {law.max_offspring} > 2024")
        if len(law.coefficients) < 2:
            raise ExampleRejected(3, f"law {name} has fewer than two distinct displacements")
    a, _ = _coeff_arrays(law_a)
    at, _ = _coeff_arrays(law_b)
    first = p * math.log(a.sum()) + (1 - p) * math.log(at.sum())
    if not first > 0.0:
        raise ExampleRejected(4, f"p log sum(a) + (1-p) log sum(a~) = {first:.6g} <= 0")
    second = _weighted_log(p, a[0], at[0])
    if not second < 0.0:
        raise ExampleRejected(4, f"p log a_1 + (1-p) log a~_1 = {second:.6g} >= 0")
    if min(a.sum(), at.sum()) < 1.0:
        raise ExampleRejected(5, f"min(sum a, sum a~) = {min(a.sum(), at.sum()):.6g} < 1")
    return EnvironmentLaw(((p, law_a), (1.0 - p, law_b)))


def _weighted_log(p, x, y):
    # 0 * log(.) counts as 0 at the p = 0, 1 boundaries
    out = 0.0
    if p > 0:
        out += p * math.log(x)
    if p < 1:
        out += (1 - p) * math.log(y)
    return out


def _decreasing_zero(fn, tol=1e-13):
    """Zero of a strictly decreasing function with ``fn(0) > 0`` and negative limit."""
    lo, hi = 0.0, 1.0
    while fn(hi) > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > THETA_CEILING:
            raise NoCriticalTilt("tau has no zero")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if fn(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class AdmissibleRange:
    """Range ``(c_minus, c_plus)`` for the weight of the ``leading`` law (0 = A, 1 = B)."""

    c_minus: float
    c_plus: float
    theta_bar: float
    leading: int

    def weight_of_a(self, q: float) -> float:
        """Convert a weight ``q`` of the leading law into the weight of law A."""
        return q if self.leading == 0 else 1.0 - q


def admissible_p_range(law_a: PointProcessLaw, law_b: PointProcessLaw) -> AdmissibleRange:
    if max(leading_coefficient(law_a), leading_coefficient(law_b)) >= 1.0:
        raise ExampleRejected(0, "max(a_1, a~_1) >= 1: the second construction does not apply")

    def zero(law):
        if example_tau(law, 0.0) <= 0.0:
            return 0.0
        return _decreasing_zero(lambda t: example_tau(law, t))

    th0, th0t = zero(law_a), zero(law_b)
    if th0 >= th0t:
        lead, other, leading, theta_bar = law_a, law_b, 0, th0
    else:
        lead, other, leading, theta_bar = law_b, law_a, 1, th0t
    lam = example_lambda(lead, theta_bar)
    lam_t = example_lambda(other, theta_bar)
    c_minus = -min(0.0, lam_t) / (lam - lam_t) if lam_t < 0.0 else 0.0
    return AdmissibleRange(c_minus=c_minus, c_plus=1.0, theta_bar=theta_bar, leading=leading)
