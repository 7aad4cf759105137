import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brwre.environment import (BarrierSpec, EnvironmentLaw, EnvironmentSequence, barrier_curve,
                               cumulative_kappa, read_replay, sample_environment, write_replay)
from brwre.errors import ConfigError, InvalidLawError
from brwre.pointprocess import laplace_profile

from conftest import LAW_14, LAW_A, LAW_B, environment_laws


def test_degenerate_indices():
    env = EnvironmentLaw.degenerate(LAW_A)
    for seed in (0, 1, 99):
        assert not sample_environment(env, 50, seed).indices.any()


def test_component_frequency():
    envlaw = EnvironmentLaw(((0.3, LAW_A), (0.7, LAW_B)))
    n = 100_000
    idx = sample_environment(envlaw, n, 17).indices
    f = (idx == 0).mean()
    assert abs(f - 0.3) <= 4 * math.sqrt(0.3 * 0.7 / n)


def test_sampling_deterministic_and_prefix_consistent(example2):
    a = sample_environment(example2, 200, 5)
    b = sample_environment(example2, 200, 5)
    c = sample_environment(example2, 50, 5)
    assert np.array_equal(a.indices, b.indices)
    assert np.array_equal(a.indices[:50], c.indices)
    assert not np.array_equal(a.indices, sample_environment(example2, 200, 6).indices)


def test_weights_validated():
    with pytest.raises(InvalidLawError, match="weights sum 0.6"):
        EnvironmentLaw(((0.3, LAW_A), (0.3, LAW_B)))
    with pytest.raises(InvalidLawError, match="no components"):
        EnvironmentLaw(())


def test_cumulative_kappa_hand_sum():
    envlaw = EnvironmentLaw(((0.5, LAW_A), (0.5, LAW_B)))
    th = 0.9
    a = math.log(0.5 * math.exp(th) + 1.5 * math.exp(-th))
    b = math.log(0.4 * (math.exp(2 * th) + 1 + math.exp(-3 * th)) + 0.6 * (1 + math.exp(-th)))
    K = cumulative_kappa(EnvironmentSequence(np.array([0, 1, 0]), 0, envlaw), th)
    assert K == pytest.approx([0.0, a, a + b, 2 * a + b], rel=1e-14)


def test_degenerate_cumulative_kappa():
    env = sample_environment(EnvironmentLaw.degenerate(LAW_14), 5, 0)
    k = laplace_profile(LAW_14, 0.7).kappa
    assert cumulative_kappa(env, 0.7) == pytest.approx(k * np.arange(6), rel=1e-14)


def test_barrier_cases(example2):
    env = sample_environment(example2, 20, 3)
    th = 1.1
    K = cumulative_kappa(env, th)
    assert barrier_curve(env, BarrierSpec(0.0, 0.5, th)) == pytest.approx(-K / th)
    phi = barrier_curve(env, BarrierSpec(2.5, 0.2, th))
    assert phi[0] == 0.0


def test_barrier_closed_form():
    env = sample_environment(EnvironmentLaw.degenerate(LAW_A), 8, 0)
    th = 1.2766224545928287
    k = laplace_profile(LAW_A, th).kappa
    phi = barrier_curve(env, BarrierSpec(1.0, 1 / 3, th))
    assert phi[8] == pytest.approx(-8 * k / th + 2.0, rel=1e-13)


def test_barrier_validation():
    with pytest.raises(ValueError):
        BarrierSpec(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        BarrierSpec(-1.0, 0.5, 1.0)


def test_replay_round_trip(tmp_path, example2):
    env = sample_environment(example2, 300, 11)
    path = write_replay(env, tmp_path / "env.replay")
    back = read_replay(path, example2)
    assert back == env
    bar = BarrierSpec(1.5, 1 / 3, 1.1673421896663518)
    assert np.array_equal(barrier_curve(back, bar), barrier_curve(env, bar))
    assert path.read_bytes().count(b"\r") == 0


def test_replay_errors(tmp_path, example2):
    p = tmp_path / "bad.replay"
    p.write_text("BRWRE-ENV v1 seed=1 n=2 components=2\n0\n7\n")
    with pytest.raises(ConfigError, match="line 3"):
        read_replay(p, example2)
    p.write_text("nonsense\n")
    with pytest.raises(ConfigError):
        read_replay(p, example2)


@settings(max_examples=30, deadline=None)
@given(environment_laws(), st.integers(0, 2**32), st.floats(0.1, 2.0))
def test_increments_follow_component(envlaw, seed, th):
    env = sample_environment(envlaw, 40, seed)
    K = cumulative_kappa(env, th)
    kap = [laplace_profile(law, th).kappa for law in envlaw.laws]
    assert np.diff(K) == pytest.approx(np.array(kap)[env.indices], rel=1e-12, abs=1e-12)
