import numpy as np
import pytest
from scipy.special import softmax

from teamwork.exact import (EvalReport, Prior, ResponseCache, bayes_regret,
                            bayes_utility, best_response, best_response_value,
                            estimate_utility, evaluate_report,
                            exact_policy_gradient, exact_utility,
                            map_scenarios, min_response_value, regret,
                            regrets, utilities)
from teamwork.evaluation import check_non_degenerative, random_policies
from teamwork.game import (RepeatedGame, Scenario, build_scenario_set,
                           prisoners_dilemma)
from teamwork.policies import SoftmaxPolicy, StochasticPolicy, canonical9
from teamwork.scenario import ScenarioBatch, background_action_distribution
from teamwork.seeding import stream


@pytest.fixture
def uniform(ipd):
    return StochasticPolicy.uniform(ipd, 'random')


def test_prior(train_set):
    p = Prior.uniform(train_set)
    assert len(p) == 10 and p.weights.sum() == pytest.approx(1)
    d = Prior.dirac(train_set, Scenario(2))
    assert d.weights[9] == 1 and d.weights.sum() == 1
    with pytest.raises(ValueError):
        Prior(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        Prior(np.array([1.0]), train_set)


def test_random_policy_metrics(uniform, train_set, canonical):
    U = utilities(uniform, train_set, canonical)
    R = regrets(uniform, train_set, canonical)
    assert U.mean() == pytest.approx(7.40, abs=1e-9)
    assert U.min() == pytest.approx(1.50, abs=1e-9)
    assert R.max() == pytest.approx(5.50, abs=1e-9)


def test_workers_do_not_change_results(uniform, train_set, canonical):
    a = map_scenarios(lambda b: b.utilities(uniform.table(b.game)), train_set,
                      canonical, None, chunk_size=3)
    b = map_scenarios(lambda b: b.utilities(uniform.table(b.game)), train_set,
                      canonical, 4, chunk_size=3)
    assert np.array_equal(a, b)
    assert np.array_equal(a, utilities(uniform, train_set, canonical))


def test_best_responses(ipd, canonical, uniform):
    assert best_response_value(Scenario(1, ('pure_defect', )), canonical,
                               ipd) == pytest.approx(3)
    assert best_response_value(Scenario(1, ('tit_for_tat_c', )), canonical,
                               ipd) == pytest.approx(13)
    assert best_response_value(Scenario(2), canonical,
                               ipd) == pytest.approx(12)
    assert min_response_value(Scenario(1, ('pure_defect', )), canonical,
                              ipd) == pytest.approx(0)
    r = best_response(Scenario(1, ('tat_for_tit_c', )), canonical, ipd)
    assert r.exact and r.value == pytest.approx(15)
    policy = StochasticPolicy(ipd, r.table, 'br')
    assert regret(policy, Scenario(1, ('tat_for_tit_c', )), canonical,
                  ipd) == pytest.approx(0, abs=1e-12)
    assert regret(uniform, Scenario(1, ('tat_for_tit_c', )), canonical,
                  ipd) == pytest.approx(5.5)


def test_response_cache(train_set, canonical):
    cache = ResponseCache(canonical)
    best, exact = cache.values(train_set)
    assert np.all(exact)
    assert best[train_set.universalisation_index] == pytest.approx(12)
    again, _ = cache.values(train_set)
    assert np.array_equal(best, again)
    with pytest.raises(ValueError):
        cache.get(train_set, 'median')


def test_bayes_objectives(uniform, train_set, canonical):
    prior = Prior.uniform(train_set)
    assert bayes_utility(uniform, prior, train_set,
                         canonical) == pytest.approx(7.4)
    d = Prior.dirac(train_set, Scenario(1, ('pure_defect', )))
    assert bayes_utility(uniform, d, train_set,
                         canonical) == pytest.approx(1.5)
    assert bayes_regret(uniform, d, train_set,
                        canonical) == pytest.approx(1.5)


def test_exact_utility_matches_estimate(ipd, canonical, uniform):
    s = Scenario(1, ('cooperate_until_defected', ))
    u = exact_utility(uniform, s, canonical, ipd)
    assert u == pytest.approx(8.5)
    mean, stderr = estimate_utility(uniform, s, canonical, ipd, 5000, seed=3)
    assert abs(mean - u) < 5 * stderr


def test_exact_policy_gradient(ipd2, canonical):
    train = build_scenario_set(ipd2, canonical)
    tree = ipd2.tree
    rng = stream(11, 'grad')
    theta = rng.normal(size=(tree.num_nodes, 2))
    prior = Prior(rng.dirichlet(np.ones(len(train))), train)
    grad = exact_policy_gradient(theta, prior, train, canonical)
    h = 1e-5
    batch = ScenarioBatch(train, canonical)

    def f(th):
        return prior.weights @ batch.utilities(softmax(th, axis=1))

    e = np.zeros_like(theta)
    e[0, 0] = h
    assert grad[0, 0] == pytest.approx((f(theta + e) - f(theta - e)) / (2 * h),
                                       rel=1e-5,
                                       abs=1e-8)
    assert np.allclose(grad.sum(axis=1), 0, atol=1e-12)

    snap = SoftmaxPolicy(ipd2, theta).snapshot('snap')
    delayed = exact_policy_gradient(theta, prior, train, canonical,
                                    'delayed', snap)
    sp = train.universalisation_index
    diff = grad - delayed
    only_sp = Prior.dirac(train, train[sp])
    half = exact_policy_gradient(theta, only_sp, train, canonical) / 2
    assert np.allclose(diff, prior.weights[sp] * half, atol=1e-12)
    with pytest.raises(ValueError):
        exact_policy_gradient(theta, prior, train, canonical, 'delayed')


def test_evaluate_report(uniform, train_set, canonical):
    report = evaluate_report(uniform, train_set, canonical)
    assert isinstance(report, EvalReport)
    assert report.bayes_utility == pytest.approx(7.4)
    rows = report.rows()
    assert [r['scenario_id'] for r in rows] == train_set.ids
    assert set(rows[0]) == {
        'scenario_id', 'utility', 'best_response', 'exact_flag', 'regret'
    }
    assert max(r['regret'] for r in rows) == pytest.approx(5.5)
    d = report.to_dict()
    assert d['bayes_regret'] == pytest.approx(report.regret.mean())


def test_constant_payoff_game():
    flat = RepeatedGame(('C', 'D'), np.full((2, 2, 2), 2.0), 2, 'flat',
                        symmetric=True)
    pop = canonical9(flat)
    scenarios = build_scenario_set(flat, pop)
    theta = stream(2, 'flat').normal(size=(flat.tree.num_nodes, 2))
    grad = exact_policy_gradient(theta, Prior.uniform(scenarios), scenarios,
                                 pop)
    assert np.allclose(grad, 0, atol=1e-12)
    for s in scenarios:
        assert min_response_value(s, pop, flat) == pytest.approx(4)
        assert best_response_value(s, pop, flat) == pytest.approx(4)
    report = check_non_degenerative(pop, flat)
    assert not report.non_degenerative
    assert np.allclose(list(report.gaps.values()), 0, atol=1e-12)


def test_one_round_gradient_closed_form():
    game = prisoners_dilemma(1)
    pop = canonical9(game)
    singles = build_scenario_set(game, pop, False)
    rng = stream(3, 'one round')
    for _ in range(20):
        theta = rng.normal(size=(game.tree.num_nodes, 2))
        w = rng.dirichlet(np.ones(len(singles)))
        pi = softmax(theta[0])
        expected = np.zeros(2)
        for ws, s in zip(w, singles):
            partner = background_action_distribution(s, pop, [])
            r = np.array([
                sum(p * game.payoff[a, b[0], 0] for b, p in partner.items())
                for a in range(2)
            ])
            expected += ws * pi * (r - pi @ r)
        grad = exact_policy_gradient(theta, Prior(w, singles), singles, pop)
        assert np.allclose(grad[0], expected, atol=1e-12)


def test_utilities_lie_between_response_values(ipd, train_set, canonical):
    cache = ResponseCache(canonical)
    hi, _ = cache.values(train_set)
    lo, _ = cache.values(train_set, 'min')
    for policy in random_policies(ipd, 1000, 11):
        U = utilities(policy, train_set, canonical)
        assert np.all(U <= hi + 1e-9) and np.all(U >= lo - 1e-9)
