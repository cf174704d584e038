import numpy as np
import pytest
from scipy.special import softmax

from teamwork.errors import EnumerationLimitError
from teamwork.game import (Scenario, ScenarioSet, build_scenario_set,
                           prisoners_dilemma)
from teamwork.policies import (PolicySet, RulePolicy, SoftmaxPolicy,
                               StochasticPolicy)
from teamwork.scenario import (EpisodeSampler, ScenarioBatch,
                               background_action_distribution,
                               enumerate_trajectories, sample_returns)
from teamwork.seeding import stream

C, D = 0, 1


def random_softmax(game, seed=0, scale=1.0):
    tree = game.tree
    theta = scale * stream(seed, 'theta').normal(size=(tree.num_nodes,
                                                       tree.num_actions))
    return SoftmaxPolicy(game, theta, 'focal')


def test_background_action_distribution(ipd, canonical, public_goods):
    tft = Scenario(1, ('tit_for_tat_c', ))
    assert background_action_distribution(tft, canonical, []) == {
        (C, ): 1.0,
        (D, ): 0.0
    }
    dist = background_action_distribution(Scenario(1, ('random', )),
                                          canonical, [(C, D)])
    assert dist == {(C, ): 0.5, (D, ): 0.5}

    pop = {'random': RulePolicy('random')}
    dist = background_action_distribution(Scenario(1, ('random', 'random')),
                                          pop, [])
    assert len(dist) == 4
    assert all(p == pytest.approx(0.25) for p in dist.values())
    with pytest.raises(ValueError):
        background_action_distribution(Scenario(2), canonical, [])


def test_background_reacts_at_own_seat(ipd, canonical):
    # the focal player defected, the tit-for-tat partner in seat 1 answers
    dist = background_action_distribution(Scenario(1, ('tit_for_tat_c', )),
                                          canonical, [(D, C)])
    assert dist[(D, )] == 1.0


def test_enumerate_deterministic(ipd, canonical):
    trajs = enumerate_trajectories(ipd, Scenario(1, ('tit_for_tat_c', )),
                                   canonical['pure_defect'], canonical)
    assert len(trajs) == 1
    assert trajs[0].probability == 1.0
    assert trajs[0].history == ((D, C), (D, D), (D, D))
    assert trajs[0].rewards == (5.0, 1.0, 1.0)
    assert trajs[0].ret == 7.0


def test_enumerate_random(ipd, ipd2, canonical):
    one = prisoners_dilemma(1)
    trajs = enumerate_trajectories(one, Scenario(1, ('random', )),
                                   RulePolicy('random'),
                                   {'random': RulePolicy('random')})
    assert len(trajs) == 4
    assert all(t.probability == pytest.approx(0.25) for t in trajs)

    trajs = enumerate_trajectories(ipd2, Scenario(1, ('tit_for_tat_c', )),
                                   canonical['random'], canonical)
    assert len(trajs) == 4
    assert sum(t.probability for t in trajs) == pytest.approx(1, abs=1e-9)


def test_trajectory_mass_and_bound(ipd, canonical):
    focal = random_softmax(ipd)
    for s in build_scenario_set(ipd, canonical):
        trajs = enumerate_trajectories(ipd, s, focal, canonical)
        assert sum(t.probability for t in trajs) == pytest.approx(1,
                                                                  abs=1e-9)
        assert all(abs(r) <= ipd.reward_bound for t in trajs
                   for r in t.rewards)


def test_marginal_matches_background(ipd2, canonical):
    focal = random_softmax(ipd2, 1)
    s = Scenario(1, ('tit_for_tat_d', ))
    trajs = enumerate_trajectories(ipd2, s, focal, canonical)
    first = trajs[0].history[0]
    prefix = [t for t in trajs if t.history[0] == first]
    mass = sum(t.probability for t in prefix)
    marg = {}
    for t in prefix:
        a = t.history[1][1:]
        marg[a] = marg.get(a, 0) + t.probability / mass
    expected = background_action_distribution(s, canonical, [first])
    for a, p in expected.items():
        assert marg.get(a, 0.0) == pytest.approx(p, abs=1e-12)


def expected_return(game, scenario, focal, policies):
    return sum(t.probability * t.ret
               for t in enumerate_trajectories(game, scenario, focal,
                                               policies))


def test_batch_matches_enumeration(ipd, canonical):
    focal = random_softmax(ipd, 2)
    train = build_scenario_set(ipd, canonical)
    U = ScenarioBatch(train, canonical).utilities(focal.probabilities)
    for s, u in zip(train, U):
        assert u == pytest.approx(expected_return(ipd, s, focal, canonical),
                                  abs=1e-10)


def test_batch_matches_enumeration_three_players(public_goods):
    pop = {
        'tft': RulePolicy('tit_for_tat', start='C', name='tft'),
        'tft2': RulePolicy('tit_for_tat', start='D', watch=2, name='tft2'),
        'random': RulePolicy('random'),
    }
    focal = random_softmax(public_goods, 3)
    scenarios = build_scenario_set(public_goods, pop)
    U = ScenarioBatch(scenarios, pop).utilities(focal.probabilities)
    for s, u in zip(scenarios, U):
        assert u == pytest.approx(
            expected_return(public_goods, s, focal, pop), abs=1e-10)


def test_random_policy_utilities(ipd, canonical):
    train = build_scenario_set(ipd, canonical)
    U = ScenarioBatch(train, canonical).utilities(
        StochasticPolicy.uniform(ipd).probabilities)
    expected = {
        'c1:cooperate_until_defected': 8.5,
        'c1:defect_until_cooperated': 5.5,
        'c1:pure_cooperate': 13.5,
        'c1:pure_defect': 1.5,
        'c1:random': 7.5,
        'c1:tat_for_tit_c': 9.5,
        'c1:tat_for_tit_d': 5.5,
        'c1:tit_for_tat_c': 9.5,
        'c1:tit_for_tat_d': 5.5,
        'c2:': 7.5,
    }
    for sid, u in zip(train.ids, U):
        assert u == pytest.approx(expected[sid], abs=1e-12)


def utility(batch, theta, w):
    return float(w @ batch.utilities(softmax(theta, axis=1)))


def test_gradient_finite_differences(ipd2, canonical):
    train = build_scenario_set(ipd2, canonical)
    batch = ScenarioBatch(train, canonical)
    tree = ipd2.tree
    for k in range(5):
        rng = stream(k, 'fd')
        theta = rng.normal(size=(tree.num_nodes, 2))
        w = rng.dirichlet(np.ones(len(train)))
        _, grad = batch.gradient(softmax(theta, axis=1), w)
        num = np.zeros_like(theta)
        h = 1e-5
        for i in range(tree.num_nodes):
            for a in range(2):
                e = np.zeros_like(theta)
                e[i, a] = h
                num[i, a] = (utility(batch, theta + e, w) -
                             utility(batch, theta - e, w)) / (2 * h)
        assert np.allclose(grad, num, rtol=1e-5, atol=1e-8)


def test_delayed_gradient_is_one_copy(ipd):
    sp = ScenarioSet(ipd, (Scenario(2), ))
    batch = ScenarioBatch(sp, {})
    pi = random_softmax(ipd, 4).probabilities
    _, joint = batch.gradient(pi, np.ones(1))
    _, delayed = batch.gradient(pi, np.ones(1), pi.copy())
    assert np.allclose(joint, 2 * delayed, atol=1e-12)
    assert np.allclose(batch.utilities(pi), batch.utilities(pi, pi.copy()))


def test_single_responses(ipd, canonical):
    train = build_scenario_set(ipd, canonical, False)
    batch = ScenarioBatch(train, canonical)
    best, tables = batch.single_responses('max')
    expected = {
        'c1:cooperate_until_defected': 13,
        'c1:defect_until_cooperated': 9,
        'c1:pure_cooperate': 15,
        'c1:pure_defect': 3,
        'c1:random': 9,
        'c1:tat_for_tit_c': 15,
        'c1:tat_for_tit_d': 11,
        'c1:tit_for_tat_c': 13,
        'c1:tit_for_tat_d': 9,
    }
    assert dict(zip(train.ids, best)) == pytest.approx(expected)
    for s in range(len(train)):
        assert batch.utilities(tables[s])[s] == pytest.approx(best[s])
    worst, _ = batch.single_responses('min')
    assert np.all(worst < best)
    assert worst[train.ids.index('c1:pure_defect')] == 0


def test_shared_response(ipd, canonical):
    train = build_scenario_set(ipd, canonical)
    batch = ScenarioBatch(train, canonical)
    assert batch.shared_search_feasible()
    sp = train.universalisation_index
    value, actions = batch.shared_response(sp, 'max')
    assert value == pytest.approx(12)
    table = np.eye(2)[actions]
    assert batch.utilities(table)[sp] == pytest.approx(12)
    value, _ = batch.shared_response(sp, 'min')
    assert value == pytest.approx(3)


def test_sequence_form(ipd, canonical):
    train = build_scenario_set(ipd, canonical, False)
    batch = ScenarioBatch(train, canonical)
    coef = batch.sequence_form()
    pi = random_softmax(ipd, 5).probabilities
    tree = ipd.tree
    plan = np.zeros_like(pi)
    reach = np.zeros(tree.num_nodes)
    reach[0] = 1
    for node in range(tree.num_nodes):
        plan[node] = reach[node] * pi[node]
        for j, child in zip(range(tree.num_joint), tree.children(node)):
            reach[child] = plan[node, tree.joint_actions[j, 0]]
    U = (coef * plan[None]).sum(axis=(1, 2))
    assert np.allclose(U, batch.utilities(pi))


def test_rollouts(ipd, canonical):
    train = build_scenario_set(ipd, canonical)
    batch = ScenarioBatch(train, canonical)
    s = train.ids.index('c1:tit_for_tat_c')
    pi = canonical['pure_defect'].table(ipd)
    returns, visits = batch.rollouts(s, pi, stream(0, 'r'), 5)
    assert np.allclose(returns, 7.0)
    assert len(visits) == 3
    nodes, actions = visits[1]
    assert nodes.shape == (5, 2)
    assert np.all(actions[:, 0] == D) and np.all(actions[:, 1] == D)


def test_sample_returns(ipd, canonical):
    returns = sample_returns(ipd, Scenario(1, ('random', )),
                             canonical['random'], canonical, stream(0, 'mc'),
                             4000)
    assert returns.shape == (4000, )
    assert returns.mean() == pytest.approx(7.5, abs=0.2)


def test_episode_sampler_matches_batch(ipd, canonical, public_goods):
    pgg_pop = PolicySet([
        RulePolicy('tit_for_tat', name='tft'),
        RulePolicy('random', name='rnd')
    ])
    for game, pop in ((ipd, canonical), (public_goods, pgg_pop)):
        train = build_scenario_set(game, pop)
        batch = ScenarioBatch(train, pop)
        sampler = EpisodeSampler(train, pop)
        pi = random_softmax(game, 4).probabilities
        copy = random_softmax(game, 5).probabilities
        for s in range(len(train)):
            a_ret, a_visits = batch.rollouts(s, pi, stream(1, 'r', s), 50,
                                             copy)
            b_ret, b_visits = sampler.rollouts(s, pi, stream(1, 'r', s), 50,
                                               copy)
            assert np.array_equal(a_ret, b_ret)
            for (n1, x1), (n2, x2) in zip(a_visits, b_visits):
                assert np.array_equal(n1, n2)
                assert np.array_equal(x1, x2)


def test_sample_returns_past_enumeration_limit(ipd, canonical, monkeypatch):
    s = Scenario(1, ('tit_for_tat_c', ))
    focal = random_softmax(ipd, 6)
    exact = sample_returns(ipd, s, focal, canonical, stream(0, 'mc'), 300)
    monkeypatch.setattr('teamwork.game.MAX_LEAVES', ipd.tree.num_leaves - 1)
    assert not ipd.tree.enumerable
    with pytest.raises(EnumerationLimitError):
        ScenarioBatch(build_scenario_set(ipd, canonical), canonical)
    lazy = sample_returns(ipd, s, focal, canonical, stream(0, 'mc'), 300)
    assert np.array_equal(exact, lazy)
