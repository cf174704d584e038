import numpy as np
import pytest

from teamwork.errors import InvalidDistributionError, UnknownHistoryError
from teamwork.policies import (PolicySet, RulePolicy, SocialPrefs,
                               SoftmaxPolicy, StochasticPolicy,
                               constant_policy, deterministic_policy,
                               policy_distance, sample_epsilon_ball,
                               sample_prefs, scenario_distance, social_payoff,
                               social_risk_reward)
from teamwork.evaluation import random_policies
from teamwork.game import RepeatedGame, Scenario, prisoners_dilemma
from teamwork.policies.base import Policy
from teamwork.seeding import stream

C, D = 0, 1


def test_rule_policies():
    tft = RulePolicy('tit_for_tat', start='C')
    assert list(tft.act([])) == [1, 0]
    assert list(tft.act([(C, D)])) == [0, 1]
    assert list(tft.act([(C, D)], role_index=1)) == [1, 0]
    assert list(RulePolicy('tit_for_tat', start='D').act([])) == [0, 1]

    tat = RulePolicy('tat_for_tit', start='C')
    assert list(tat.act([])) == [1, 0]
    assert list(tat.act([(C, C)])) == [0, 1]
    assert list(tat.act([(D, D)])) == [1, 0]

    assert list(RulePolicy('pure_cooperate').act([(D, D)])) == [1, 0]
    assert list(RulePolicy('pure_defect').act([(C, C)])) == [0, 1]
    assert list(RulePolicy('random').act([(C, D)])) == [0.5, 0.5]


def test_cooperate_until_defected_is_absorbing():
    p = RulePolicy('cooperate_until_defected')
    assert list(p.act([])) == [1, 0]
    assert list(p.act([(C, C), (C, C)])) == [1, 0]
    assert list(p.act([(C, D), (D, C)])) == [0, 1]


def test_defect_until_cooperated_follows_last_move():
    p = RulePolicy('defect_until_cooperated')
    assert list(p.act([])) == [0, 1]
    assert list(p.act([(D, C)])) == [1, 0]
    assert list(p.act([(D, C), (C, D)])) == [0, 1]


def test_rule_policy_arguments():
    with pytest.raises(ValueError):
        RulePolicy('grim')
    with pytest.raises(ValueError):
        RulePolicy('pure_defect', start='C')
    with pytest.raises(ValueError):
        RulePolicy('tit_for_tat', start='X')
    with pytest.raises(ValueError):
        RulePolicy('tit_for_tat', watch=0)
    assert RulePolicy('tit_for_tat', start='D').params == {'start': 'D'}


def test_rule_table(ipd):
    tab = RulePolicy('tit_for_tat', start='C').table(ipd)
    assert tab.shape == (ipd.tree.num_nodes, 2)
    assert np.allclose(tab.sum(axis=1), 1)
    node = ipd.tree.node_id([(C, D)])
    assert list(tab[node]) == [0, 1]


class Broken(Policy):

    def probs(self, view):
        return np.array([0.7, 0.7])


def test_invalid_distribution(ipd):
    with pytest.raises(InvalidDistributionError):
        Broken('broken').act([])
    with pytest.raises(InvalidDistributionError):
        Broken('broken').table(ipd)
    bad = np.full((ipd.tree.num_nodes, 2), 0.5)
    bad[3] = [1.5, -0.5]
    with pytest.raises(InvalidDistributionError):
        StochasticPolicy(ipd, bad)


def test_softmax_policy(ipd):
    tree = ipd.tree
    theta = stream(0, 'test').normal(size=(tree.num_nodes, 2))
    p = SoftmaxPolicy(ipd, theta, 'p')
    probs = p.probabilities
    assert np.all(probs > 0)
    assert np.allclose(probs.sum(axis=1), 1, atol=1e-12)
    assert np.allclose(p.act([(C, C)]), probs[tree.node_id([(C, C)])])
    p.update(np.ones_like(theta))
    assert np.allclose(p.probabilities, probs)
    p.update(np.eye(2)[np.zeros(tree.num_nodes, dtype=int)])
    assert np.all(p.probabilities[:, 0] > probs[:, 0])
    snap = p.snapshot('s')
    p.update(np.ones_like(theta))
    assert np.allclose(snap.probabilities, p.probabilities)
    with pytest.raises(ValueError):
        SoftmaxPolicy(ipd, np.zeros((3, 2)))


def test_tabular_off_domain(ipd):
    p = StochasticPolicy.uniform(ipd, 'u')
    with pytest.raises(UnknownHistoryError):
        p.act([(C, C)] * 3)
    with pytest.raises(UnknownHistoryError):
        p.table(prisoners_dilemma(2))


def test_deterministic_policies(ipd):
    n = ipd.tree.num_nodes
    p = constant_policy(ipd, 'D', 'always_d')
    assert np.array_equal(p.table(ipd),
                          RulePolicy('pure_defect').table(ipd))
    q = deterministic_policy(ipd, np.zeros(n, dtype=int))
    assert np.array_equal(q.table(ipd)[:, 0], np.ones(n))


def test_policy_set():
    ps = PolicySet([RulePolicy('random')], {'random': 'g'})
    ps.add(RulePolicy('pure_defect'), 'h')
    assert list(ps) == ['random', 'pure_defect']
    assert ps.subpopulations() == {'g': ['random'], 'h': ['pure_defect']}
    with pytest.raises(ValueError):
        ps.add(RulePolicy('random'))
    with pytest.raises(KeyError):
        ps['nope']
    merged = ps.merged(PolicySet([RulePolicy('pure_cooperate')]))
    assert len(merged) == 3 and merged.labels['random'] == 'g'


def test_canonical9(canonical):
    assert len(canonical) == 9
    names = set(canonical)
    assert {'tit_for_tat_c', 'tit_for_tat_d'} <= names
    assert list(canonical['pure_cooperate'].act([(D, D), (D, D)])) == [1, 0]


def test_social_transform(ipd):
    flat = ipd.payoff.reshape(-1, 2)
    assert np.allclose(social_payoff(ipd, 0, SocialPrefs(1, 1)), flat[:, 0])
    assert np.allclose(social_payoff(ipd, 1, SocialPrefs(0, 1)),
                       flat.sum(axis=1))
    game = prisoners_dilemma()
    payoff = game.payoff - 2
    shifted = RepeatedGame(game.actions, payoff, 3)
    # (C, D) gives player 0 a reward of -2, scaled by delta
    assert social_risk_reward(shifted, (C, D), 0,
                              SocialPrefs(1, 0.5)) == pytest.approx(-1.0)
    assert social_risk_reward(shifted, (D, C), 0,
                              SocialPrefs(1, 0.5)) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        social_risk_reward(ipd, (C, C), 2, SocialPrefs())


def test_sample_prefs():
    prefs = [sample_prefs(stream(1, 'prefs', k)) for k in range(50)]
    assert all(-0.2 <= p.lam <= 1.2 and 0.1 <= p.delta <= 2 for p in prefs)
    assert SocialPrefs.from_dict(prefs[0].to_dict()) == prefs[0]


def test_policy_distance(ipd, canonical):
    assert policy_distance(canonical['pure_cooperate'],
                           canonical['pure_defect'], ipd) == 2
    assert policy_distance(canonical['random'], canonical['pure_defect'],
                           ipd) == 1
    assert policy_distance(canonical['random'], canonical['random'],
                           ipd) == 0


def test_policy_distance_triangle_inequality(ipd, canonical):
    pool = list(canonical.values()) + random_policies(ipd, 30, 2)
    rng = stream(4, 'triangle')
    for _ in range(300):
        a, b, c = (pool[i] for i in rng.choice(len(pool), 3))
        ab = policy_distance(a, b, ipd)
        assert ab == policy_distance(b, a, ipd)
        assert policy_distance(a, c, ipd) <= ab + policy_distance(
            b, c, ipd) + 1e-12


def test_defect_until_cooperated_plays_suspicious_tit_for_tat(
        ipd, canonical):
    assert policy_distance(canonical['defect_until_cooperated'],
                           canonical['tit_for_tat_d'], ipd) == 0
    assert policy_distance(canonical['cooperate_until_defected'],
                           canonical['tit_for_tat_c'], ipd) > 0


def test_scenario_distance(ipd, canonical, public_goods):
    s1 = Scenario(1, ('pure_cooperate', ))
    s2 = Scenario(1, ('pure_defect', ))
    assert scenario_distance(s1, s2, canonical, ipd) == 2
    assert scenario_distance(s1, s1, canonical, ipd) == 0
    assert scenario_distance(Scenario(2), Scenario(2), canonical, ipd) == 0
    with pytest.raises(ValueError):
        scenario_distance(s1, Scenario(2), canonical, ipd)

    pop = {
        'c': RulePolicy('pure_cooperate', name='c'),
        'd': RulePolicy('pure_defect', name='d')
    }
    a = Scenario(1, ('c', 'd'))
    b = Scenario(1, ('d', 'c'))
    assert scenario_distance(a, b, pop, public_goods) == 0
    assert scenario_distance(a, Scenario(1, ('c', 'c')), pop,
                             public_goods) == 2


def test_epsilon_ball(ipd, canonical):
    bases = list(canonical.values()) + random_policies(ipd, 3, 8)
    rng = stream(3, 'radius')
    for k in range(10000):
        base = bases[k % len(bases)]
        eps = float(rng.uniform(0.01, 2))
        p = sample_epsilon_ball(base, eps, stream(3, 'ball', k), ipd)
        assert policy_distance(p, base, ipd) < eps
        assert np.allclose(p.table(ipd).sum(axis=1), 1)
    base = canonical['tit_for_tat_c']
    copy = sample_epsilon_ball(base, 0, stream(3), ipd)
    assert np.array_equal(copy.table(ipd), base.table(ipd))
    assert copy.name == base.name
    with pytest.raises(ValueError):
        sample_epsilon_ball(base, -1, stream(3), ipd)
