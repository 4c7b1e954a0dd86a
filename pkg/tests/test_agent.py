import json
import math

import numpy as np
import pytest

from vslice_xrl.agent import AttentionActor, DDPGAgent, ReplayBuffer, run_training
from vslice_xrl.config import ConfigError, NetworkConfig, TrainConfig
from vslice_xrl.env import VehicularEnv
from vslice_xrl.explain import explanation_loss
from vslice_xrl.nn import DenseNet

# attention fixture evaluated independently in plain Python (W stored as (in, out))
WA = [[0.6322527182400628, -0.638547240152125, 0.1632003273249325, 0.2778269378523681],
      [-0.25520491454853755, 0.09548893141911563, -0.8744220500533537, -0.8807976600675347],
      [-0.5880825743613469, 0.3607999463635718, -0.14481538866119426, -0.37170565924641696],
      [0.17112372701527745, -0.09363124725844929, -0.4004660062726353, 0.5887589630449823]]
BA = [0.3979888674591425, -0.5118069785556942, 0.148847420517342, 0.050393007622902886]
S_FIX = [0.8751374955734289, 0.7294452894392176, 0.2879377648901865, 0.9801748474925821]
ALPHA_FIX = [0.5227658717011342, 0.09062572203363242, 0.11163084253588204, 0.27497756372935145]


def small_actor(rng, d=4, out=3, learn=True):
    return AttentionActor.create(d, out, (8,), rng, learn_attention=learn)


def small_agent(rng, variant="sverl", d=6, out=4, **kw):
    train = TrainConfig(variant=variant, batch_size=8, hidden=(10, 6), **kw)
    return DDPGAgent.create(d, out, train, rng)


def filled_buffer(rng, n=40, d=6, out=4):
    buf = ReplayBuffer(100, d, out)
    for _ in range(n):
        buf.add(rng.random(d), rng.random(out), -rng.random(), rng.random(d))
    return buf


# ---------------------------------------------------------------- attention


def test_attention_pinned_fixture():
    body = DenseNet.create([4, 5, 2], ["relu", "sigmoid"], np.random.default_rng(0))
    actor = AttentionActor(DenseNet([(WA, BA, "softmax")]), body)
    alpha, weighted = actor.attention_forward(np.array(S_FIX))
    np.testing.assert_allclose(alpha, ALPHA_FIX, rtol=0, atol=1e-14)
    np.testing.assert_allclose(weighted, np.array(ALPHA_FIX) * S_FIX, atol=1e-14)


def test_zero_attention_weights_are_uniform(rng):
    actor = small_actor(rng)
    actor.attention.set_flat(np.zeros(actor.attention.num_params))
    alpha, _ = actor.attention_forward(rng.random(4))
    np.testing.assert_allclose(alpha, 0.25)


def test_zero_state_weighted_is_zero(rng):
    _, weighted = small_actor(rng).attention_forward(np.zeros(4))
    assert np.all(weighted == 0)


def test_attention_is_a_probability_vector(rng):
    actor = small_actor(rng, d=12)
    states = rng.normal(0, 3, size=(10_000, 12))
    alpha, _ = actor.attention_forward(states)
    assert np.max(np.abs(alpha.sum(axis=1) - 1)) < 1e-6
    assert np.all(alpha > 0)


def test_attention_dimension_mismatch(rng):
    with pytest.raises(ValueError, match="dimension"):
        small_actor(rng).attention_forward(np.zeros(5))


def test_frozen_attention_is_uniform_and_gets_no_gradient(rng):
    actor = small_actor(rng, learn=False)
    alpha, _ = actor.attention_forward(rng.random((3, 4)))
    np.testing.assert_allclose(alpha, 0.25)
    _, cache = actor.forward(rng.random((3, 4)))
    grads = actor.backward(cache, np.ones((3, 3)))
    assert grads[:actor.n_attention_params] == [None, None]
    assert all(g is not None for g in grads[actor.n_attention_params:])


def test_uniform_attention_passes_state_through(rng):
    # with alpha = 1/d the body sees the raw state
    actor = small_actor(rng, learn=False)
    s = rng.random((5, 4))
    np.testing.assert_allclose(actor(s), actor.body(s), atol=1e-15)


def test_actor_gradients_match_finite_differences(rng):
    actor = small_actor(rng)
    s = rng.random((3, 4))
    g_out = rng.normal(size=(3, 3))
    g_alpha = rng.normal(size=(3, 4))
    _, cache = actor.forward(s)
    grads = actor.backward(cache, g_out, g_alpha)

    def objective():
        a, _ = actor.forward(s)
        alpha, _ = actor.attention_forward(s)
        return np.sum(a * g_out) + np.sum(alpha * g_alpha)
    h = 1e-6
    for p, g in zip(actor.params(), grads):
        for idx in list(np.ndindex(p.shape))[:12]:
            old = p[idx]
            p[idx] = old + h
            up = objective()
            p[idx] = old - h
            dn = objective()
            p[idx] = old
            num = (up - dn) / (2 * h)
            assert abs(num - g[idx]) <= 1e-6 * max(1.0, abs(num))


# ---------------------------------------------------------------- acting


def test_act_zero_noise_is_policy(rng):
    agent = small_agent(rng)
    s = rng.random(6)
    np.testing.assert_array_equal(agent.act(s, 0.0, rng), agent.policy(s))


def test_act_large_noise_stays_in_unit_box(rng):
    agent = small_agent(rng)
    a = agent.act(rng.random((200, 6)), 10.0, rng)
    assert a.min() >= 0.0 and a.max() <= 1.0


def test_noise_schedule():
    train = TrainConfig()
    assert train.noise_sigma(0) == pytest.approx(0.2)
    assert train.noise_sigma(1) == pytest.approx(0.199)
    assert train.noise_sigma(100) == pytest.approx(0.2 * 0.995 ** 100)
    # 0.2 * 0.995^e drops below 0.01 at e = ceil(ln 20 / -ln 0.995) = 598
    assert train.noise_sigma(597) > 0.01
    assert train.noise_sigma(598) == 0.01
    assert train.noise_sigma(10_000) == 0.01


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(gamma=1.0)
    with pytest.raises(ConfigError):
        TrainConfig(batch_size=200, buffer_capacity=100)
    with pytest.raises(ConfigError):
        TrainConfig(explain_weight=-0.1)
    with pytest.raises(ConfigError):
        TrainConfig(variant="ppo")


# ---------------------------------------------------------------- learning


def test_zero_critic_on_zero_rewards_has_zero_loss(rng):
    agent = small_agent(rng)
    for net in (agent.critic, agent.critic_target):
        net.set_flat(np.zeros(net.num_params))
    s, a = rng.random(6), rng.random(4)
    loss = agent.critic_update(np.tile(s, (8, 1)), np.tile(a, (8, 1)), np.zeros(8), np.tile(s, (8, 1)))
    assert loss == 0.0


def test_critic_loss_decreases_on_constant_reward(rng):
    agent = small_agent(rng, gamma=0.5)
    s, a, s2 = rng.random((8, 6)), rng.random((8, 4)), rng.random((8, 6))
    r = np.full(8, -1.0)
    first = agent.critic_update(s, a, r, s2)
    second = agent.critic_update(s, a, r, s2)
    assert second < first


def test_train_batch_moves_every_network(rng):
    agent = small_agent(rng)
    buf = filled_buffer(rng)
    before = [n.flat() for n in (agent.actor.attention, agent.actor.body, agent.critic,
                                 agent.actor_target.body, agent.critic_target)]
    c, a, e = agent.train_batch(buf, rng)
    assert math.isnan(e)
    after = [n.flat() for n in (agent.actor.attention, agent.actor.body, agent.critic,
                                agent.actor_target.body, agent.critic_target)]
    assert math.isfinite(c) and math.isfinite(a)
    for b0, b1 in zip(before, after):
        assert not np.array_equal(b0, b1)


def test_ddpg_variant_keeps_attention_fixed(rng):
    agent = small_agent(rng, variant="ddpg")
    w0 = agent.actor.attention.flat()
    agent.train_batch(filled_buffer(rng), rng)
    np.testing.assert_array_equal(agent.actor.attention.flat(), w0)


def test_explain_weight_by_variant():
    assert DDPGAgent.create(4, 2, TrainConfig(variant="sverl"), np.random.default_rng(0)).explain_weight == 0.1
    assert DDPGAgent.create(4, 2, TrainConfig(variant="attention"), np.random.default_rng(0)).explain_weight == 0.0


def test_total_gradient_composition(rng):
    """Attention gradient with lambda > 0 equals the lambda = 0 gradient plus lambda * explanation gradient."""
    agent = small_agent(rng)
    s = rng.random((8, 6))
    states = rng.random((3, 6))
    psi = rng.normal(size=(3, 6))
    lam = 0.37
    g0, _, _ = agent.actor_gradients(s)
    g_lam, _, explain = agent.actor_gradients(s, states, psi, weight=lam)
    g_zero, _, _ = agent.actor_gradients(s, states, psi, weight=0.0)
    # the explanation gradient by itself, through the attention layer only
    alpha, cache = agent.actor.attention.forward(states)
    loss, g_alpha = explanation_loss(alpha, psi)
    g_exp, _ = agent.actor.attention.backward(cache, g_alpha)
    n_att = agent.actor.n_attention_params
    assert explain == pytest.approx(loss)
    for k in range(n_att):
        np.testing.assert_allclose(g_lam[k], g0[k] + lam * g_exp[k], rtol=0, atol=1e-6)
        np.testing.assert_allclose(g_zero[k], g0[k], rtol=0, atol=1e-15)
    for k in range(n_att, len(g0)):
        np.testing.assert_array_equal(g_lam[k], g0[k])


def test_supervised_batches_pull_alpha_towards_targets(rng):
    agent = small_agent(rng, explain_weight=50.0, actor_lr=1e-2)
    buf = filled_buffer(rng)
    states = rng.random((4, 6))
    psi = np.tile([5.0, 1, 1, 1, 1, 1], (4, 1))
    first = agent.train_batch(buf, rng, states, psi)[2]
    for _ in range(30):
        last = agent.train_batch(buf, rng, states, psi)[2]
    assert last < first


# ---------------------------------------------------------------- replay


def test_replay_fifo_eviction():
    buf = ReplayBuffer(3, 1, 1)
    for k in range(5):
        buf.add([k], [0], float(k), [k])
    assert len(buf) == 3
    assert sorted(buf.rewards.tolist()) == [2.0, 3.0, 4.0]
    assert buf.mean_state() == pytest.approx([3.0])


def test_replay_sampling_is_reproducible(rng):
    buf = filled_buffer(rng)
    a = [buf.sample_indices(8, np.random.default_rng(9)) for _ in range(2)]
    np.testing.assert_array_equal(a[0], a[1])


def test_replay_refuses_small_buffer(rng):
    with pytest.raises(ValueError, match="need 8"):
        filled_buffer(rng, n=3).sample(8, rng)


# ---------------------------------------------------------------- checkpoint


def test_checkpoint_roundtrip(rng):
    agent = small_agent(rng)
    agent.train_batch(filled_buffer(rng), rng)
    doc = json.loads(json.dumps(agent.to_dict()))
    clone = DDPGAgent.from_dict(doc)
    s = rng.random((4, 6))
    np.testing.assert_array_equal(clone.policy(s), agent.policy(s))
    assert json.dumps(clone.to_dict(), sort_keys=True) == json.dumps(agent.to_dict(), sort_keys=True)


def test_checkpoint_rejects_unknown_format(rng):
    with pytest.raises(ValueError, match="format"):
        DDPGAgent.from_dict({"format": "other"})


# ---------------------------------------------------------------- training loop


def _tiny_setup(variant="sverl", **kw):
    cfg = NetworkConfig(num_vehicles=2, num_gnbs=2)
    params = dict(variant=variant, episodes=2, steps_per_episode=12, batch_size=8, hidden=(12,),
                  eval_interval=1, shapley_samples=2, rollout_horizon=2, rollout_count=1, explain_states=2)
    params.update(kw)
    train = TrainConfig(**params)
    env = VehicularEnv(cfg, seed=5)
    agent = DDPGAgent.create(cfg.obs_dim, cfg.action_dim, train, np.random.default_rng(1))
    return env, agent, train


def test_no_updates_before_buffer_holds_a_batch():
    env, agent, train = _tiny_setup(episodes=1, steps_per_episode=3)
    res = run_training(env, agent, train, seed=0)
    assert len(res.buffer) == 3
    assert res.records[0].updates == 0
    assert math.isnan(res.records[0].critic_loss)


def test_training_records_and_supervision():
    env, agent, train = _tiny_setup(episodes=4, eval_interval=2)
    seen = []
    res = run_training(env, agent, train, seed=0, on_episode=seen.append)
    assert [r.episode for r in res.records] == [1, 2, 3, 4]
    assert seen == res.records
    assert res.records[0].updates == 12 - 8 + 1
    # episodes 2 and 4 supervise, using states snapshotted in episodes 1 and 3
    assert [math.isfinite(r.explain_loss) for r in res.records] == [False, True, False, True]


def test_first_episode_cannot_supervise():
    env, agent, train = _tiny_setup(eval_interval=1)
    res = run_training(env, agent, train, seed=0)
    assert math.isnan(res.records[0].explain_loss) and math.isfinite(res.records[1].explain_loss)


def test_attention_variant_never_supervises():
    env, agent, train = _tiny_setup(variant="attention")
    res = run_training(env, agent, train, seed=0)
    assert all(math.isnan(r.explain_loss) for r in res.records)


def test_training_is_deterministic():
    rows = []
    for _ in range(2):
        env, agent, train = _tiny_setup()
        res = run_training(env, agent, train, seed=3)
        rows.append(([r.row() for r in res.records], agent.actor.body.flat()))
    assert repr(rows[0][0]) == repr(rows[1][0])
    np.testing.assert_array_equal(rows[0][1], rows[1][1])
