"""Robustness metrics, test-set generation and the epsilon-net audits."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import EpsilonNetError
from .exact import (Prior, ResponseCache, evaluate_report, utilities)
from .game import RepeatedGame, ScenarioSet, build_scenario_set
from .lp import maximin_utility, minimax_regret
from .policies.base import Policy
from .policies.distance import sample_epsilon_ball, scenario_distance
from .policies.population import PolicySet
from .policies.tabular import StochasticPolicy
from .seeding import stream

log = logging.getLogger(__name__)


@dataclass
class MetricsRecord():
    u_avg: float
    u_min: float
    r_max: float
    scenario_set_name: str
    exact: np.ndarray
    method: str = ''

    @property
    def exact_br(self) -> bool:
        return bool(np.all(self.exact))

    def row(self) -> dict:
        return {
            'method': self.method,
            'scenario_set': self.scenario_set_name,
            'u_avg': self.u_avg,
            'u_min': self.u_min,
            'r_max': self.r_max,
            'exact_br': self.exact_br,
        }


def evaluate_metrics(policy: Policy,
                     scenario_set: ScenarioSet,
                     policies: Mapping[str, Policy],
                     cache: Optional[ResponseCache] = None,
                     method: str = '',
                     workers: Optional[int] = None) -> MetricsRecord:
    """Average utility, worst-case utility and worst-case regret."""
    if len(scenario_set) == 0:
        raise ValueError('scenario set is empty')
    report = evaluate_report(policy, scenario_set, policies, None, cache,
                             workers)
    return MetricsRecord(float(report.utility.mean()),
                         float(report.utility.min()),
                         float(report.regret.max()), scenario_set.name,
                         report.exact, method)


def generate_test_population(base_population: Mapping[str, Policy],
                             epsilon: float, count: int, seed: int,
                             game: RepeatedGame) -> PolicySet:
    """Stochastic partners within ``epsilon`` of the base policies.

    Partner ``k`` perturbs base ``k mod n`` (in identifier order) with its
    own random stream and is named ``<base>~<k>``; its label is the base
    identifier.  With ``epsilon == 0`` the result is one copy of each base
    under its own identifier.
    """
    if not 0 <= epsilon <= 2:
        raise ValueError(f'epsilon must lie in [0, 2], got {epsilon}')
    if count < 1:
        raise ValueError('count must be positive')
    names = sorted(base_population)
    if not names:
        raise ValueError('base population is empty')
    ret = PolicySet()
    if epsilon == 0:
        for name in names:
            ret.add(StochasticPolicy.from_policy(game, base_population[name]),
                    name)
        return ret
    for k in range(count):
        base = names[k % len(names)]
        ret.add(
            sample_epsilon_ball(base_population[base], epsilon,
                                stream(seed, 'testset', k), game,
                                f'{base}~{k:04d}'), base)
    log.debug('generated %d test partners at epsilon %g', count, epsilon)
    return ret


def test_scenario_set(game: RepeatedGame,
                      test_population: Mapping[str, Policy],
                      name: str = 'test') -> ScenarioSet:
    """Each test partner with one focal player, plus the universalisation
    scenario."""
    return build_scenario_set(game,
                              test_population,
                              include_universalisation=True,
                              focal_counts={1, game.num_players},
                              name=name)


@dataclass
class NonDegeneracyReport():
    gaps: dict[str, float]
    exact: dict[str, bool]
    tolerance: float = 1e-9

    @property
    def non_degenerative(self) -> bool:
        return all(g > self.tolerance for g in self.gaps.values())


def check_non_degenerative(population: Mapping[str, Policy],
                           game: RepeatedGame,
                           focal_counts: Optional[Sequence[int]] = None,
                           cache: Optional[ResponseCache] = None
                           ) -> NonDegeneracyReport:
    """Gap between best and worst achievable utility in every scenario."""
    scenario_set = build_scenario_set(game,
                                      population,
                                      focal_counts=focal_counts)
    cache = cache or ResponseCache(population)
    hi, hi_exact = cache.values(scenario_set, 'max')
    lo, lo_exact = cache.values(scenario_set, 'min')
    return NonDegeneracyReport(
        {s.id: float(h - l)
         for s, h, l in zip(scenario_set, hi, lo)},
        {s.id: bool(a and b)
         for s, a, b in zip(scenario_set, hi_exact, lo_exact)})


def utility_gap_bound(epsilon: float, game: RepeatedGame) -> float:
    return epsilon * game.horizon**2 * game.reward_bound / 2


def regret_gap_bound(epsilon: float, game: RepeatedGame) -> float:
    return epsilon * game.horizon**2 * game.reward_bound


def match_scenarios(train_set: ScenarioSet, train_policies: Mapping[str,
                                                                    Policy],
                    test_set: ScenarioSet, test_policies: Mapping[str,
                                                                  Policy],
                    epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Nearest training scenario of every test scenario.

    Returns:
        (index, distance) arrays aligned with ``test_set``.

    Raises:
        EpsilonNetError: a test scenario has no training scenario within
            ``epsilon`` (distance 0 is required when ``epsilon == 0``).
    """
    game = train_set.game
    both = PolicySet(train_policies.values())
    for name, p in test_policies.items():
        if name in both:
            if not np.array_equal(p.table(game), both[name].table(game)):
                raise ValueError(f'policy {name!r} differs between the '
                                 'training and test populations')
            continue
        both.add(p)
    index = np.zeros(len(test_set), dtype=int)
    dist = np.zeros(len(test_set))
    for i, s in enumerate(test_set):
        best, arg = np.inf, -1
        for k, r in enumerate(train_set):
            if r.focal_count != s.focal_count:
                continue
            d = scenario_distance(s, r, both, game)
            if d < best:
                best, arg = d, k
            if d == 0:
                break
        ok = best == 0 if epsilon == 0 else best < epsilon
        if arg < 0 or not ok:
            raise EpsilonNetError(
                f'test scenario {s} is {best:g} away from the training set, '
                f'epsilon is {epsilon:g}')
        index[i], dist[i] = arg, best
    return index, dist


@dataclass
class AuditReport():
    epsilon: float
    utility_bound: float
    regret_bound: float
    max_utility_gap: float
    max_regret_gap: float
    violations: int
    guarantee_slack: dict[str, float] = field(default_factory=dict)
    references: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and all(
            v > 0 or self.epsilon == 0 and v >= -1e-9
            for v in self.guarantee_slack.values())

    def to_dict(self) -> dict:
        return {
            'epsilon': self.epsilon,
            'utility_bound': self.utility_bound,
            'regret_bound': self.regret_bound,
            'max_utility_gap': self.max_utility_gap,
            'max_regret_gap': self.max_regret_gap,
            'violations': self.violations,
            'guarantee_slack': dict(self.guarantee_slack),
            'references': dict(self.references),
            'passed': self.passed,
        }


def random_policies(game: RepeatedGame, num: int,
                    seed: int) -> list[StochasticPolicy]:
    tree = game.tree
    ret = []
    for i in range(num):
        rng = stream(seed, 'audit', i)
        ret.append(
            StochasticPolicy(
                game, rng.dirichlet(np.ones(tree.num_actions),
                                    size=tree.num_nodes), f'audit{i}'))
    return ret


def _within(gap: np.ndarray, bound: float) -> np.ndarray:
    return (gap < bound) | (gap <= 1e-12)


def audit_epsilon_bounds(train_set: ScenarioSet,
                         train_policies: Mapping[str, Policy],
                         test_set: ScenarioSet,
                         test_policies: Mapping[str, Policy],
                         epsilon: float,
                         num_policies: int = 100,
                         seed: int = 0,
                         trained: Optional[Mapping[str, Policy]] = None
                         ) -> AuditReport:
    """Check the epsilon-closeness bounds on utility and regret.

    Random policies are evaluated on every test scenario and its nearest
    training scenario; utility gaps must stay below ``eps T^2 |r|/2`` and
    regret gaps below ``eps T^2 |r|``.  Policies in ``trained`` under the keys
    ``'MU'`` and ``'MR'`` are checked against the worst-case guarantees on
    the test set; the reference training value is the exact game value when
    every training scenario has one focal player, otherwise the trained
    policy's own training value.
    """
    game = train_set.game
    index, _ = match_scenarios(train_set, train_policies, test_set,
                               test_policies, epsilon)
    bound_u = utility_gap_bound(epsilon, game)
    bound_r = regret_gap_bound(epsilon, game)
    train_cache = ResponseCache(train_policies, seed)
    test_cache = ResponseCache(test_policies, seed)
    best_train, _ = train_cache.values(train_set)
    best_test, _ = test_cache.values(test_set)
    worst_u = worst_r = 0.0
    violations = 0
    for policy in random_policies(game, num_policies, seed):
        u_train = utilities(policy, train_set, train_policies)[index]
        u_test = utilities(policy, test_set, test_policies)
        du = np.abs(u_test - u_train)
        dr = np.abs((best_test - u_test) - (best_train[index] - u_train))
        worst_u = max(worst_u, float(du.max()))
        worst_r = max(worst_r, float(dr.max()))
        violations += int(np.sum(~_within(du, bound_u)) +
                          np.sum(~_within(dr, bound_r)))
    if violations:
        log.error('%d epsilon-closeness violations at epsilon %g', violations,
                  epsilon)

    slack, refs = {}, {}
    single = bool(np.all(train_set.focal_counts == 1))
    for method, policy in (trained or {}).items():
        method = method.upper()
        u_test = utilities(policy, test_set, test_policies)
        if method == 'MU':
            if single:
                ref = maximin_utility(train_set, train_policies).value
            else:
                ref = float(utilities(policy, train_set, train_policies).min())
            refs['MU'] = ref
            slack['MU'] = float(u_test.min() - (ref - bound_u))
        elif method == 'MR':
            if single:
                ref = minimax_regret(train_set, train_policies,
                                     train_cache).value
            else:
                ref = float((best_train - utilities(policy, train_set,
                                                    train_policies)).max())
            refs['MR'] = ref
            slack['MR'] = float((ref + bound_r) - (best_test - u_test).max())
    return AuditReport(epsilon, bound_u, bound_r, worst_u, worst_r,
                       violations, slack, refs)


@dataclass
class SweepRow():
    method: str
    epsilon: float
    u_avg: float
    u_min: float
    r_max: float

    def row(self) -> dict:
        return {
            'method': self.method,
            'epsilon': self.epsilon,
            'u_avg': self.u_avg,
            'u_min': self.u_min,
            'r_max': self.r_max,
        }


def sweep_epsilon(policies_by_method: Mapping[str, Policy],
                  base_population: Mapping[str, Policy],
                  game: RepeatedGame,
                  epsilon_grid: Sequence[float],
                  count: int = 512,
                  seed: int = 0,
                  workers: Optional[int] = None) -> list[SweepRow]:
    """Metrics of every method on a fresh test population per epsilon."""
    rows = []
    for eps in epsilon_grid:
        test_pop = generate_test_population(base_population, eps, count, seed,
                                            game)
        test_set = test_scenario_set(game, test_pop, f'test@{eps:g}')
        cache = ResponseCache(test_pop, seed)
        for method, policy in policies_by_method.items():
            rec = evaluate_metrics(policy, test_set, test_pop, cache, method,
                                   workers)
            rows.append(
                SweepRow(method, float(eps), rec.u_avg, rec.u_min, rec.r_max))
        log.info('epsilon %g: %d test scenarios', eps, len(test_set))
    return rows


@dataclass
class SaddleReport():
    value: float
    prior_gap: float
    policy_gap: float
    tolerance: float

    @property
    def holds(self) -> bool:
        return (self.prior_gap >= -self.tolerance
                and self.policy_gap >= -self.tolerance)


def check_saddle_point(policy: Policy,
                       prior: Prior,
                       scenario_set: ScenarioSet,
                       policies: Mapping[str, Policy],
                       objective: str = 'utility',
                       num_priors: int = 1000,
                       num_policies: int = 1000,
                       tol: float = 0.05,
                       seed: int = 0,
                       cache: Optional[ResponseCache] = None) -> SaddleReport:
    """Compare ``(policy, prior)`` against random priors and random policies.

    For ``objective='utility'`` no prior may lower the policy's Bayesian
    utility below its value at ``prior`` and no policy may beat it at
    ``prior``; ``'regret'`` is the mirror statement.  Gaps are reported with
    the sign that is non-negative at an exact saddle point.
    """
    if objective not in ('utility', 'regret'):
        raise ValueError(f'unknown objective {objective!r}')
    game = scenario_set.game
    cache = cache or ResponseCache(policies, seed)
    best, _ = cache.values(scenario_set)
    sign = 1.0 if objective == 'utility' else -1.0

    def loss(u):
        return u if objective == 'utility' else best - u

    w = prior.weights
    u_star = utilities(policy, scenario_set, policies)
    value = float(w @ loss(u_star))
    rng = stream(seed, 'saddle', 'priors')
    betas = rng.dirichlet(np.ones(len(scenario_set)), size=num_priors)
    prior_gap = float(sign * (betas @ loss(u_star) - value).min())
    policy_gap = np.inf
    for i in range(num_policies):
        rng = stream(seed, 'saddle', 'policy', i)
        other = sample_epsilon_ball(policy, float(rng.uniform(0, 2)), rng,
                                    game)
        v = float(w @ loss(utilities(other, scenario_set, policies)))
        policy_gap = min(policy_gap, sign * (value - v))
    return SaddleReport(value, prior_gap, float(policy_gap), tol)
