import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brwre.environment import EnvironmentLaw, cumulative_kappa, sample_environment
from brwre.errors import BudgetExceeded
from brwre.pointprocess import laplace_profile, spine_step_law
from brwre.spine import (PathFunctional, exhaustive_oracle, genealogy_states, many_to_one_estimate,
                         sample_spine, tilt_relation)

from conftest import DOUBLING, LAW_14, LAW_A, environment_laws, point_laws

VARTHETA_A = 1.2766224545928287


def _window_family(n, centre):
    return [
        PathFunctional.one(n),
        PathFunctional(n, windows=[(c - 2.0, c + 2.0) for c in centre]),
        PathFunctional(n, windows=[(c - 0.5, c + 1.5) for c in centre]),
        PathFunctional(n, windows=[(-math.inf, 0.0)] * n),
        PathFunctional(n, caps=[2.0] * n),
        PathFunctional(n, caps=[3.0] + [1.0] * (n - 1)),
        PathFunctional(n, windows=[(c - 1.0, c + 3.0) for c in centre], caps=[4.0] * n),
    ]


def test_doubling_spine():
    env = sample_environment(EnvironmentLaw.degenerate(DOUBLING), 6, 0)
    tr = sample_spine(env, 0.7, np.random.default_rng(0))
    assert np.all(tr.chi == 0) and np.all(tr.xi == 2)
    assert tr.T == pytest.approx(np.arange(7) * math.log(2))


def test_spine_moments_degenerate():
    env = sample_environment(EnvironmentLaw.degenerate(LAW_A), 1, 0)
    law = spine_step_law(LAW_A, VARTHETA_A)
    rng = np.random.default_rng(3)
    idx = rng.choice(len(law.atoms), size=100_000, p=law.mass / law.mass.sum())
    kap = laplace_profile(LAW_A, VARTHETA_A)
    T1 = kap.kappa + VARTHETA_A * law.x[idx]
    se = T1.std() / math.sqrt(T1.size)
    assert abs(T1.mean()) <= 4 * se
    var = T1.var()
    se_var = math.sqrt(((T1 - T1.mean()) ** 4).mean() - var**2) / math.sqrt(T1.size)
    assert abs(var - VARTHETA_A**2 * kap.d2) <= 4 * se_var
    tr = sample_spine(env, VARTHETA_A, rng)
    assert tr.T[0] == 0.0


def test_mto_doubling_exact():
    env = sample_environment(EnvironmentLaw.degenerate(DOUBLING), 2, 0)
    est = many_to_one_estimate(env, 0.5, PathFunctional.one(2), 500, 1)
    assert est.value == pytest.approx(4.0, rel=1e-12) and est.stderr == pytest.approx(0.0, abs=1e-12)
    for mode in ("genealogy", "spine-dp"):
        assert exhaustive_oracle(env, 0.5, PathFunctional.one(2), mode) == pytest.approx(4.0, rel=1e-14)


def test_mto_expected_population(example2):
    n = 10
    env = sample_environment(example2, n, 4)
    # a moderate tilt keeps exp(T_n) light-tailed enough for the stderr to be honest
    est = many_to_one_estimate(env, 0.3, PathFunctional.one(n), 200_000, 2)
    assert est.within(math.exp(cumulative_kappa(env, 0.0)[-1]), 4.0)


def test_mto_window_against_oracle():
    env = sample_environment(EnvironmentLaw.degenerate(LAW_14), 3, 0)
    th = 0.9
    f = PathFunctional(3, windows=[(-1.0, 1.0), (-2.0, 1.0), (-1.0, 2.0)])
    truth = exhaustive_oracle(env, th, f, "genealogy")
    est = many_to_one_estimate(env, th, f, 200_000, 5)
    assert est.within(truth, 4.0)
    assert exhaustive_oracle(env, th, f, "spine-dp") == pytest.approx(truth, rel=1e-10)


def test_zero_cap_kills_everything():
    env = sample_environment(EnvironmentLaw.degenerate(LAW_14), 3, 0)
    f = PathFunctional(3, caps=[0, 0, 0])
    assert exhaustive_oracle(env, 0.9, f, "genealogy") == 0.0
    assert exhaustive_oracle(env, 0.9, f, "spine-dp") == 0.0


def test_budget():
    env = sample_environment(EnvironmentLaw.degenerate(LAW_14), 6, 0)
    assert genealogy_states(env, 6) > 1000
    with pytest.raises(BudgetExceeded):
        exhaustive_oracle(env, 0.9, PathFunctional.one(6), "genealogy", budget=1000)


def test_functional_validation():
    with pytest.raises(ValueError):
        PathFunctional(3, windows=[(0, 1)])
    assert PathFunctional(2, windows=[(0, 1), (0, 1)], caps=[1, 1]).kind == "window*cap"


@settings(max_examples=40, deadline=None)
@given(environment_laws(), st.integers(1, 4), st.integers(0, 2**31), st.floats(0.2, 2.0))
def test_oracles_agree(envlaw, n, seed, th):
    env = sample_environment(envlaw, n, seed)
    K = cumulative_kappa(env, th)
    centre = [-K[i] / th for i in range(1, n + 1)]
    for f in _window_family(n, centre):
        try:
            g = exhaustive_oracle(env, th, f, "genealogy", budget=200_000)
        except BudgetExceeded:
            return
        s = exhaustive_oracle(env, th, f, "spine-dp")
        assert s == pytest.approx(g, rel=1e-9, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(point_laws(), st.floats(0.1, 2.0))
def test_tilt_relation(law, th):
    for lam in (0.5, -0.5):
        direct, closed = tilt_relation(law, th, lam)
        assert direct == pytest.approx(closed, rel=1e-10)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_mto_unbiased(example2, n):
    env = sample_environment(example2, n, n)
    th = 1.1673421896663524
    K = cumulative_kappa(env, th)
    f = PathFunctional(n, windows=[(-K[i] / th - 1.5, -K[i] / th + 2.5) for i in range(1, n + 1)], caps=[3] * n)
    truth = exhaustive_oracle(env, th, f, "spine-dp")
    est = many_to_one_estimate(env, th, f, 100_000, 9)
    assert est.within(truth, 4.0)
