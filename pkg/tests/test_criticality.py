import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brwre.criticality import (AssumptionParams, admissible_p_range, annealed_profile, assumption_report,
                               dispersion_params, example_lambda, feasible_lambda5, find_critical_theta,
                               qqq_components, root_function, two_env_example, _window_masses)
from brwre.environment import EnvironmentLaw
from brwre.errors import ExampleRejected, NoCriticalTilt
from brwre.pointprocess import PointProcessLaw, laplace_profile, spine_step_law

from conftest import LAW_14, LAW_A, LAW_B, environment_laws

# mpmath roots of kappa = theta kappa' on the closed-form Laplace transforms
VARTHETA_A = 1.2766224545928287
VARTHETA_EX2 = 1.1673421896663524
LAW_B2 = PointProcessLaw.from_pairs([(0.9, [0, 0, 0, 0]), (0.1, [-1])])


def test_single_law_root():
    prof = find_critical_theta(EnvironmentLaw.degenerate(LAW_A))
    assert prof.vartheta == pytest.approx(VARTHETA_A, abs=1e-9)
    assert prof.sigma2 == pytest.approx(0.0, abs=1e-18)


def test_example2_profile(example2):
    prof = find_critical_theta(example2)
    assert prof.vartheta == pytest.approx(VARTHETA_EX2, abs=1e-9)
    assert prof.kappa_at == pytest.approx(1.2012266270827638, rel=1e-9)
    assert prof.kappa0 == pytest.approx(0.7843079589569226, rel=1e-12)
    assert prof.sigma2 == pytest.approx(0.0076537380471139377, rel=1e-7)
    assert prof.sigma2_star == pytest.approx(1.0754594799038868, rel=1e-8)
    assert abs(prof.kappa_at - prof.vartheta * prof.kappa_prime) <= 1e-10


def test_cosh_law_has_no_root():
    with pytest.raises(NoCriticalTilt):
        find_critical_theta(EnvironmentLaw.degenerate(PointProcessLaw.deterministic([-1, 1])))


def test_subcritical_rejected():
    law = PointProcessLaw.from_pairs([(0.6, []), (0.4, [0])])
    with pytest.raises(NoCriticalTilt):
        find_critical_theta(EnvironmentLaw.degenerate(law))


@pytest.mark.parametrize("theta", [0.3, 0.8, 1.0, 1.6, 2.4])
def test_mixture_kappa(theta):
    a = laplace_profile(LAW_A, theta).kappa
    b = laplace_profile(LAW_B, theta).kappa
    env = EnvironmentLaw(((0.3, LAW_A), (0.7, LAW_B)))
    assert annealed_profile(env, theta)[0] == pytest.approx(0.3 * a + 0.7 * b, rel=1e-14)
    assert annealed_profile(EnvironmentLaw.degenerate(LAW_A), theta)[0] == pytest.approx(a, rel=1e-14)


@pytest.mark.parametrize("theta", [0.2, 0.7, 1.0, 1.5, 3.0])
def test_two_env_identity(theta, example2):
    lhs = root_function(example2, theta)
    rhs = 0.5 * example_lambda(LAW_A, theta) + 0.5 * example_lambda(LAW_B, theta)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_sigma_star_matches_spine_variance(example2):
    th = VARTHETA_EX2
    _, s2s = dispersion_params(example2, th)
    direct = math.fsum(w * th**2 * spine_step_law(law, th).var_x() for w, law in example2.components)
    assert s2s == pytest.approx(direct, abs=1e-10)


def test_duplicated_component_has_no_spread():
    env = EnvironmentLaw(((0.5, LAW_A), (0.5, LAW_A)))
    assert find_critical_theta(env).sigma2 == pytest.approx(0.0, abs=1e-18)


def test_degenerate_report_tails():
    env = EnvironmentLaw.degenerate(LAW_A)
    rep = assumption_report(env, find_critical_theta(env))
    assert rep.status("T<") == "satisfied" and rep.status("T>") == "satisfied"


def test_example1_report(example1):
    rep = assumption_report(example1, find_critical_theta(example1))
    assert rep.qqq_flagged
    assert rep.status("qqq") == "violated" and rep.status("T<") == "violated"


def test_example2_report(example2):
    rep = assumption_report(example2, find_critical_theta(example2))
    assert rep.all_satisfied, rep.format()


def test_lambda5_windows_grow(example2):
    th = VARTHETA_EX2
    prev_lo = prev_hi = None
    for lam5 in (-1.0, -2.0, -4.0, -8.0, -64.0):
        lo = _window_masses(example2, th, lam5, upper=False)
        hi = _window_masses(example2, th, lam5, upper=True)
        if prev_lo is not None:
            assert all(a >= b - 1e-15 for a, b in zip(lo, prev_lo))
            assert all(a >= b - 1e-15 for a, b in zip(hi, prev_hi))
        prev_lo, prev_hi = lo, hi
    assert feasible_lambda5(example2, th) is not None


def test_two_env_steps():
    # the displayed law with itself: first clause of step 4 holds (log 3.4 > 0), the second fails (a_1 = 1.5)
    with pytest.raises(ExampleRejected, match="log a_1") as exc:
        two_env_example(0.3, LAW_14, LAW_14)
    assert exc.value.step == 4
    assert {(float(b), a) for b, a in LAW_14.coefficients} == {(-1.0, 1.5), (0.0, 0.2), (2.0, 1.0), (3.0, 0.7)}
    with pytest.raises(ExampleRejected) as exc:
        two_env_example(1.0, LAW_14, LAW_A)
    assert exc.value.step == 4
    with pytest.raises(ExampleRejected) as exc:
        two_env_example(1.2, LAW_A, LAW_B)
    assert exc.value.step == 1
    two_env_example(0.5, LAW_A, LAW_14)
    with pytest.raises(ExampleRejected) as exc:
        two_env_example(0.5, LAW_A, PointProcessLaw.deterministic([0, 0]))
    assert exc.value.step == 3


def test_admissible_range_trivial_lower(example2):
    r = admissible_p_range(LAW_A, LAW_B)
    assert r.c_plus == 1.0 and r.c_minus == 0.0
    with pytest.raises(ExampleRejected):
        admissible_p_range(LAW_A, LAW_14)


def _lam_mp(law, theta):
    coeffs = [(mp.mpf(float(b)), mp.mpf(a)) for b, a in law.coefficients]
    k = lambda t: mp.log(mp.fsum(a * mp.e ** (-t * b) for b, a in coeffs))
    return k(theta) - theta * mp.diff(k, theta)


def test_admissible_lower_end_grid_scan():
    r = admissible_p_range(LAW_A, LAW_B2)
    assert 0.0 < r.c_minus < r.c_plus == 1.0
    lead, other = (LAW_A, LAW_B2) if r.leading == 0 else (LAW_B2, LAW_A)
    tb = mp.mpf(r.theta_bar)
    la, lb = _lam_mp(lead, tb), _lam_mp(other, tb)
    grid = np.linspace(0, 1, 20001)
    first = next(q for q in grid if q * la + (1 - q) * lb > 0)
    assert abs(first - r.c_minus) <= 1e-4


def test_admissible_p_satisfies_report():
    r = admissible_p_range(LAW_A, LAW_B2)
    for q in np.linspace(r.c_minus, 1.0, 7)[1:-1]:
        pa = r.weight_of_a(float(q))
        env = two_env_example(pa, LAW_A, LAW_B2)
        th = r.theta_bar
        val = pa * example_lambda(LAW_A, th) + (1 - pa) * example_lambda(LAW_B2, th)
        assert val > 0


@settings(max_examples=25, deadline=None)
@given(environment_laws(max_components=3))
def test_root_residual_and_monotone(envlaw):
    try:
        prof = find_critical_theta(envlaw)
    except NoCriticalTilt:
        return
    assert abs(prof.kappa_at - prof.vartheta * prof.kappa_prime) <= 1e-10
    if all(len(law.distinct_displacements()) >= 2 for law in envlaw.laws):
        grid = np.linspace(0.05, 2 * prof.vartheta, 15)
        f = [root_function(envlaw, float(t)) for t in grid]
        assert all(b < a + 1e-12 for a, b in zip(f, f[1:]))
    rep = assumption_report(envlaw, prof)
    if rep.qqq_flagged:
        assert rep.status("T<") == "violated"
