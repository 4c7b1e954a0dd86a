import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vslice_xrl.agent import AttentionActor
from vslice_xrl.config import NetworkConfig
from vslice_xrl.env import VehicularEnv, project_action
from vslice_xrl.evalkit import (
    RandomPolicy,
    collect_episode,
    evaluate_policy,
    fidelity_pearson,
    pearson,
    perturbation_response,
    qos_satisfaction,
    random_factory,
    random_policy,
    run_comparison,
)
from vslice_xrl.nn import DenseNet

finite = st.floats(-1e3, 1e3, allow_nan=False)


# ---------------------------------------------------------------- pearson


@settings(max_examples=60)
@given(st.lists(finite, min_size=3, max_size=20), st.floats(0.1, 10), st.floats(-5, 5))
def test_pearson_identities(xs, scale, shift):
    x = np.array(xs)
    if np.ptp(x) == 0:
        assert math.isnan(pearson(x, x))
        return
    if np.ptp(x) < 1e-6:
        return
    assert pearson(x, x) == pytest.approx(1.0)
    assert pearson(x, -x) == pytest.approx(-1.0)
    y = np.sin(np.arange(len(x)) * 1.3)
    assert pearson(scale * x + shift, y) == pytest.approx(pearson(x, y), abs=1e-9)


def test_pearson_known_value():
    # hand-computed: x=(1,2,3,4), y=(2,1,4,3) -> r = 0.6
    assert pearson([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6)


def test_pearson_constant_is_nan():
    assert math.isnan(pearson([1, 1, 1], [1, 2, 3]))


# ---------------------------------------------------------------- fidelity


class LinearStub:
    """Actor stub: alpha fixed, action = sum_i w_i s_i (so response_i = |w_i| delta)."""

    def __init__(self, alpha, w):
        self.alpha = np.asarray(alpha, float)
        self.w = np.asarray(w, float)

    def attention_forward(self, s):
        return self.alpha, self.alpha * s

    def __call__(self, s):
        return (np.asarray(s) @ self.w)[..., None]


def test_fidelity_is_one_when_importance_matches_response():
    stub = LinearStub([0.1, 0.2, 0.3, 0.4], [1.0, 2.0, 3.0, 4.0])
    rep = fidelity_pearson(stub, np.random.default_rng(0).random((5, 4)), delta=0.5)
    np.testing.assert_allclose(rep.correlations, 1.0)
    assert rep.skipped == 0 and rep.mean == pytest.approx(1.0)


def test_fidelity_skips_constant_importance():
    stub = LinearStub([0.25] * 4, [1.0, 2.0, 3.0, 4.0])
    rep = fidelity_pearson(stub, np.ones((3, 4)), delta=1.0)
    assert rep.skipped == 3 and math.isnan(rep.mean)


def test_perturbation_response_linear():
    stub = LinearStub([0.5, 0.5], [3.0, -4.0])
    np.testing.assert_allclose(perturbation_response(stub, np.zeros(2), np.array([0.5, 2.0])), [1.5, 8.0])


def test_fidelity_default_delta_is_feature_std(rng):
    actor = AttentionActor.create(6, 3, (8,), rng)
    states = rng.random((10, 6))
    rep = fidelity_pearson(actor, states)
    np.testing.assert_allclose(rep.delta, states.std(axis=0))
    assert np.all(np.abs(rep.correlations) <= 1.0)


# ---------------------------------------------------------------- qos


def test_random_policy_entries_and_feasibility(config):
    rng = np.random.default_rng(4)
    for _ in range(200):
        act = random_policy(rng, config.num_vehicles, config.num_gnbs)
        assert act.q.min() >= 0 and act.q.max() <= 1 and act.b.min() >= 0 and act.b.max() <= 1
        alloc = project_action(act, config)
        assert np.all(alloc.prbs.sum(axis=0) <= config.prbs_per_gnb)


def test_random_policy_reproducible(config):
    a = RandomPolicy(np.random.default_rng(1), 5, 3)(None)
    b = RandomPolicy(np.random.default_rng(1), 5, 3)(None)
    np.testing.assert_array_equal(a, b)


def _satisfy_all_episode(config):
    env = VehicularEnv(config, seed=0)
    m = collect_episode(env, lambda s: np.full(config.action_dim, 0.5), 5)
    m.urllc_violation[:] = False
    m.embb_violation[:] = False
    return m


def test_all_satisfied_is_hundred_percent(config):
    u, e = qos_satisfaction([_satisfy_all_episode(config)])
    assert u == 100.0 and e == 100.0


def test_zero_opportunity_slice_is_not_applicable(config):
    m = _satisfy_all_episode(config)
    m.s_embb[:] = False
    u, e = qos_satisfaction([m])
    assert u == 100.0 and e is None


def test_qos_needs_episodes():
    with pytest.raises(ValueError):
        qos_satisfaction([])


def test_satisfied_plus_violated_equals_opportunities(config):
    env = VehicularEnv(config, seed=3)
    pol = RandomPolicy(np.random.default_rng(0), config.num_vehicles, config.num_gnbs)
    m = collect_episode(env, pol, 50)
    viol_u = int(np.sum(m.active & m.s_urllc & m.urllc_violation))
    viol_e = int(np.sum(m.active & m.s_embb & m.embb_violation))
    assert m.urllc_satisfied + viol_u == m.urllc_opportunities
    assert m.embb_satisfied + viol_e == m.embb_opportunities
    assert m.reward.shape == (50,) and m.delay.shape == (50, config.num_vehicles)


def test_comparison_rows_and_ranges(config):
    const = lambda seed: (lambda s: np.full(config.action_dim, 0.5))  # noqa: E731
    rows = run_comparison(config, {"sverl": const, "random": random_factory(config)}, [0, 1], 2, 20)
    assert [r.method for r in rows] == ["random", "sverl"]
    for r in rows:
        assert 0 <= r.urllc_pct <= 100 and 0 <= r.embb_pct <= 100
        assert r.episodes == 4


def test_evaluation_is_reproducible(config):
    a = evaluate_policy(config, random_factory(config), [7], 2, 10)
    b = evaluate_policy(config, random_factory(config), [7], 2, 10)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.reward, y.reward)


def test_evaluation_does_not_mutate_the_policy(config, rng):
    actor = AttentionActor.create(config.obs_dim, config.action_dim, (8,), rng)
    before = [p.copy() for p in actor.params()]
    evaluate_policy(config, lambda s: actor, [0], 1, 5)
    for p, q in zip(before, actor.params()):
        np.testing.assert_array_equal(p, q)


def test_random_baseline_near_reference(config):
    (row,) = run_comparison(config, {"random": random_factory(config)}, list(range(5)), 10, 100)
    assert abs(row.urllc_pct - 33.04) <= 6 and abs(row.embb_pct - 34.44) <= 6
