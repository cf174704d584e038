import numpy as np
import pytest

from teamwork.errors import EnumerationLimitError, UnknownHistoryError
from teamwork.game import (RepeatedGame, Scenario, ScenarioSet,
                           build_scenario_set, history_key, parse_history_key,
                           per_capita_reward, perspective, prisoners_dilemma)
from teamwork.policies import RulePolicy, canonical9


def test_prisoners_dilemma(ipd):
    assert ipd.num_players == 2
    assert ipd.actions == ('C', 'D')
    assert ipd.horizon == 3
    assert ipd.reward_bound == 5
    assert ipd.is_symmetric()
    assert list(ipd.reward((0, 1))) == [0, 5]


def test_game_validation():
    with pytest.raises(ValueError):
        RepeatedGame(('C', 'D'), np.zeros((2, 2)), 3)
    with pytest.raises(ValueError):
        RepeatedGame(('C', 'C'), np.zeros((2, 2, 2)), 3)
    with pytest.raises(ValueError):
        RepeatedGame(('C', 'D'), np.zeros((2, 2, 2)), 0)
    payoff = np.zeros((2, 2, 2))
    payoff[0, 1] = [1, 2]
    with pytest.raises(ValueError):
        RepeatedGame(('C', 'D'), payoff, 3, symmetric=True)
    payoff[0, 0] = [np.inf, 0]
    with pytest.raises(ValueError):
        RepeatedGame(('C', 'D'), payoff, 3)


def test_game_dict(ipd):
    d = ipd.to_dict()
    assert d['payoffs'] == [[[4, 4], [0, 5]], [[5, 0], [1, 1]]]
    game = RepeatedGame.from_dict(d)
    assert np.array_equal(game.payoff, ipd.payoff)
    assert game.horizon == 3 and game.symmetric
    d['players'] = 3
    with pytest.raises(ValueError):
        RepeatedGame.from_dict(d)


def test_per_capita_reward(ipd):
    assert per_capita_reward(ipd, (0, 0), [0]) == 4
    assert per_capita_reward(ipd, (1, 0), [0, 1]) == 2.5
    assert per_capita_reward(ipd, (1, 1), [0]) == 1
    with pytest.raises(ValueError):
        per_capita_reward(ipd, (0, 0), [])
    with pytest.raises(ValueError):
        per_capita_reward(ipd, (0, 0), [2])


def test_history_tree(ipd):
    tree = ipd.tree
    assert tree.num_joint == 4
    assert tree.num_nodes == 1 + 4 + 16
    assert tree.num_leaves == 64
    for node, h in enumerate(tree.histories()):
        assert tree.node_id(h) == node
    assert list(tree.children(0)) == [1, 2, 3, 4]
    assert len(tree.children(tree.node_id([(0, 0), (1, 1)]))) == 0
    with pytest.raises(UnknownHistoryError):
        tree.node_id([(0, 0)] * 3)
    with pytest.raises(UnknownHistoryError):
        tree.node_id([(0, 2)])


def test_views_rotate_histories(ipd):
    tree = ipd.tree
    for t, view in enumerate(tree.views):
        for local in range(tree.sizes[t]):
            h = tree.history_of(tree.offsets[t] + local)
            for role in range(2):
                assert view[role, local] == tree.node_id(perspective(h, role))


def test_enumeration_limit():
    game = prisoners_dilemma(12)
    assert not game.tree.enumerable
    with pytest.raises(EnumerationLimitError):
        game.tree.check_enumerable()


def test_history_keys(ipd):
    h = ((0, 1), (1, 1))
    assert history_key(h, ipd.actions) == 'CD|DD'
    assert history_key((), ipd.actions) == ''
    assert parse_history_key('CD|DD', ipd.actions, 2) == h
    assert parse_history_key('', ipd.actions, 2) == ()
    with pytest.raises(ValueError):
        parse_history_key('CX', ipd.actions, 2)
    with pytest.raises(ValueError):
        parse_history_key('CDC', ipd.actions, 2)


def test_scenario_ids():
    s = Scenario(1, ('pure_defect', ))
    assert s.id == 'c1:pure_defect'
    assert Scenario.from_id(s.id) == s
    assert Scenario.from_id('c2:') == Scenario(2)
    assert Scenario(2).is_universalisation
    with pytest.raises(ValueError):
        Scenario(0, ('a', 'b'))
    with pytest.raises(ValueError):
        Scenario.from_id('x1:a')


def test_build_scenario_set(ipd, canonical):
    train = build_scenario_set(ipd, canonical)
    assert len(train) == 10
    assert train.universalisation_index == 9
    assert list(train.focal_counts) == [1] * 9 + [2]
    assert train.ids[:2] == [
        'c1:cooperate_until_defected', 'c1:defect_until_cooperated'
    ]
    again = build_scenario_set(ipd, canonical)
    assert train.ids == again.ids

    sp = build_scenario_set(ipd, ['random'], focal_counts={2})
    assert sp.ids == ['c2:']
    without = build_scenario_set(ipd, canonical, False)
    assert len(without) == 9


def test_build_scenario_set_three_players(public_goods):
    s = build_scenario_set(public_goods, ['a', 'b'], focal_counts={1})
    assert s.ids == ['c1:a,a', 'c1:a,b', 'c1:b,a', 'c1:b,b']
    s = build_scenario_set(public_goods, ['a', 'b'])
    assert list(s.focal_counts) == [1] * 4 + [2] * 2 + [3]


def test_build_scenario_set_errors(ipd):
    with pytest.raises(ValueError):
        build_scenario_set(ipd, [])
    with pytest.raises(ValueError):
        build_scenario_set(ipd, ['random'], focal_counts={3})


def test_scenario_set_checks(ipd):
    s = Scenario(1, ('random', ))
    with pytest.raises(ValueError):
        ScenarioSet(ipd, (s, s))
    with pytest.raises(ValueError):
        ScenarioSet(ipd, (Scenario(1, ('a', 'b')), ))
    ss = ScenarioSet(ipd, (s, Scenario(2)))
    assert ss.index(Scenario(2)) == 1
    assert s in ss
    assert ss.background_names() == ['random']


def test_canonical_needs_cd():
    game = RepeatedGame(('X', 'Y'), prisoners_dilemma().payoff, 3)
    with pytest.raises(ValueError):
        canonical9(game)
    with pytest.raises(ValueError):
        RulePolicy('tit_for_tat', game.actions)
