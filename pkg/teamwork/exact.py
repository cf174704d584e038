"""Exact utilities, regrets, responses and policy gradients."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from scipy.special import softmax

from .game import RepeatedGame, Scenario, ScenarioSet
from .policies.base import Policy
from .scenario import ScenarioBatch, sample_returns
from .seeding import stream

log = logging.getLogger(__name__)

REGRET_TOLERANCE = 1e-7


@dataclass
class Prior():
    """Probability vector over a scenario set."""
    weights: np.ndarray
    scenario_set: Optional[ScenarioSet] = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or len(w) == 0:
            raise ValueError('prior weights must be a non-empty vector')
        if np.any(w < -1e-12) or abs(w.sum() - 1) > 1e-9:
            raise ValueError(
                f'prior weights are not a distribution (sum {w.sum()!r})')
        if self.scenario_set is not None and len(w) != len(self.scenario_set):
            raise ValueError(f'prior has {len(w)} weights for '
                             f'{len(self.scenario_set)} scenarios')
        self.weights = np.clip(w, 0, None)

    def __len__(self):
        return len(self.weights)

    @classmethod
    def uniform(cls, scenario_set: ScenarioSet) -> Prior:
        n = len(scenario_set)
        return cls(np.full(n, 1 / n), scenario_set)

    @classmethod
    def dirac(cls, scenario_set: ScenarioSet, scenario: Scenario) -> Prior:
        w = np.zeros(len(scenario_set))
        w[scenario_set.index(scenario)] = 1.0
        return cls(w, scenario_set)


def _aligned(prior: Prior, scenario_set: ScenarioSet) -> np.ndarray:
    w = prior.weights if isinstance(prior, Prior) else np.asarray(prior)
    if len(w) != len(scenario_set):
        raise ValueError(f'prior has {len(w)} weights for '
                         f'{len(scenario_set)} scenarios')
    return w


def _chunks(scenario_set: ScenarioSet, size: int) -> list[ScenarioSet]:
    return [
        ScenarioSet(scenario_set.game, scenario_set.scenarios[i:i + size],
                    scenario_set.name)
        for i in range(0, len(scenario_set), size)
    ]


def map_scenarios(fn,
                  scenario_set: ScenarioSet,
                  policies: Mapping[str, Policy],
                  workers: Optional[int] = None,
                  chunk_size: int = 64) -> np.ndarray:
    """Apply ``fn(batch)`` to chunks of the set and concatenate the results
    in scenario order, whatever the worker count."""
    batches = [ScenarioBatch(s, policies) for s in _chunks(scenario_set,
                                                           chunk_size)]
    if workers is None or workers <= 1 or len(batches) == 1:
        parts = [fn(b) for b in batches]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, batches))
    return np.concatenate(parts)


def utilities(policy: Policy,
              scenario_set: ScenarioSet,
              policies: Mapping[str, Policy],
              workers: Optional[int] = None) -> np.ndarray:
    """``U(policy, s)`` for every scenario of the set."""
    table = policy.table(scenario_set.game)
    return map_scenarios(lambda b: b.utilities(table), scenario_set, policies,
                         workers)


def exact_utility(policy: Policy, scenario: Scenario,
                  policies: Mapping[str, Policy], game: RepeatedGame) -> float:
    """Expected focal per-capita return of ``policy`` in ``scenario``."""
    single = ScenarioSet(game, (scenario, ), 'single')
    return float(utilities(policy, single, policies)[0])


@dataclass(frozen=True)
class Response():
    """Optimal (or extremal) value of a scenario with the policy reaching
    it; ``exact`` is False when the value is only a bound."""
    value: float
    exact: bool = True
    table: Optional[np.ndarray] = field(default=None, repr=False)


def _ascent_response(batch: ScenarioBatch,
                     s: int,
                     sense: str,
                     seed: int = 0,
                     restarts: int = 20,
                     steps: int = 300,
                     lr: float = 1.0) -> Response:
    sign = 1.0 if sense == 'max' else -1.0
    tree = batch.tree
    w = np.zeros(batch.size)
    w[s] = sign
    best, best_table = None, None
    for r in range(restarts):
        rng = stream(seed, 'response', sense, batch.scenario_set[s].id, r)
        theta = rng.normal(size=(tree.num_nodes, tree.num_actions))
        for _ in range(steps):
            _, g = batch.gradient(softmax(theta, axis=1), w)
            theta += lr * g
        table = softmax(theta, axis=1)
        value = float(batch.utilities(table)[s])
        if best is None or sign * value > sign * best:
            best, best_table = value, table
    log.info('%s response for %s by gradient ascent is a bound: %g', sense,
             batch.scenario_set[s], best)
    return Response(best, False, best_table)


def _responses(batch: ScenarioBatch, sense: str, seed: int = 0):
    ret = [None] * batch.size
    single = np.flatnonzero(batch.focal_counts == 1)
    if len(single):
        values, tables = batch.single_responses(sense, single)
        for k, s in enumerate(single):
            ret[s] = Response(float(values[k]), True, tables[k])
    for s in np.flatnonzero(batch.focal_counts > 1):
        if batch.shared_search_feasible():
            value, actions = batch.shared_response(s, sense)
            table = np.eye(batch.tree.num_actions)[actions]
            ret[s] = Response(value, True, table)
        else:
            ret[s] = _ascent_response(batch, s, sense, seed)
    return ret


class ResponseCache():
    """Responses of one game and background population, keyed by
    scenario id."""

    def __init__(self, policies: Mapping[str, Policy], seed: int = 0):
        self.policies = policies
        self.seed = seed
        self._cache: dict[tuple[str, str], Response] = {}

    def get(self, scenario_set: ScenarioSet,
            sense: str = 'max') -> list[Response]:
        if sense not in ('max', 'min'):
            raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
        todo = [s for s in scenario_set if (sense, s.id) not in self._cache]
        if todo:
            sub = ScenarioSet(scenario_set.game, tuple(todo), 'pending')
            batch = ScenarioBatch(sub, self.policies)
            for s, r in zip(todo, _responses(batch, sense, self.seed)):
                self._cache[(sense, s.id)] = r
        return [self._cache[(sense, s.id)] for s in scenario_set]

    def values(self, scenario_set: ScenarioSet, sense: str = 'max'):
        """``(values, exact_flags)`` arrays in scenario order."""
        rs = self.get(scenario_set, sense)
        return (np.array([r.value for r in rs]),
                np.array([r.exact for r in rs], dtype=bool))


def best_response(scenario: Scenario,
                  policies: Mapping[str, Policy],
                  game: RepeatedGame,
                  sense: str = 'max') -> Response:
    single = ScenarioSet(game, (scenario, ), 'single')
    return ResponseCache(policies).get(single, sense)[0]


def best_response_value(scenario: Scenario, policies: Mapping[str, Policy],
                        game: RepeatedGame) -> float:
    """Maximal utility achievable in ``scenario``."""
    return best_response(scenario, policies, game, 'max').value


def min_response_value(scenario: Scenario, policies: Mapping[str, Policy],
                       game: RepeatedGame) -> float:
    """Minimal utility achievable in ``scenario``."""
    return best_response(scenario, policies, game, 'min').value


def regret(policy: Policy,
           scenario: Scenario,
           policies: Mapping[str, Policy],
           game: RepeatedGame,
           best: Optional[float] = None) -> float:
    if best is None:
        best = best_response_value(scenario, policies, game)
    return best - exact_utility(policy, scenario, policies, game)


def regrets(policy: Policy,
            scenario_set: ScenarioSet,
            policies: Mapping[str, Policy],
            cache: Optional[ResponseCache] = None,
            workers: Optional[int] = None) -> np.ndarray:
    cache = cache or ResponseCache(policies)
    best, _ = cache.values(scenario_set)
    return best - utilities(policy, scenario_set, policies, workers)


def bayes_utility(policy: Policy, prior: Prior, scenario_set: ScenarioSet,
                  policies: Mapping[str, Policy]) -> float:
    w = _aligned(prior, scenario_set)
    return float(w @ utilities(policy, scenario_set, policies))


def bayes_regret(policy: Policy,
                 prior: Prior,
                 scenario_set: ScenarioSet,
                 policies: Mapping[str, Policy],
                 cache: Optional[ResponseCache] = None) -> float:
    w = _aligned(prior, scenario_set)
    return float(w @ regrets(policy, scenario_set, policies, cache))


def exact_policy_gradient(theta: np.ndarray,
                          prior: Prior,
                          scenario_set: ScenarioSet,
                          policies: Mapping[str, Policy],
                          copy_mode: str = 'joint',
                          snapshot: Optional[Policy] = None) -> np.ndarray:
    """Gradient of ``U(softmax(theta), prior)`` with respect to ``theta``.

    In ``'delayed'`` mode the focal copies after the first play
    ``snapshot`` and are not differentiated.
    """
    if copy_mode not in ('joint', 'delayed'):
        raise ValueError(f'unknown copy_mode {copy_mode!r}')
    w = _aligned(prior, scenario_set)
    batch = ScenarioBatch(scenario_set, policies)
    copy = None
    if copy_mode == 'delayed':
        if snapshot is None:
            raise ValueError("copy_mode 'delayed' needs a snapshot")
        copy = snapshot.table(scenario_set.game)
    _, grad = batch.gradient(softmax(theta, axis=1), w, copy)
    return grad


def estimate_utility(policy: Policy,
                     scenario: Scenario,
                     policies: Mapping[str, Policy],
                     game: RepeatedGame,
                     num_rollouts: int = 1000,
                     seed: int = 0) -> tuple[float, float]:
    """Monte Carlo utility as ``(mean, standard error)``."""
    returns = sample_returns(game, scenario, policy, policies,
                             stream(seed, 'estimate', scenario.id),
                             num_rollouts)
    stderr = returns.std(ddof=1) / np.sqrt(len(returns)) if len(
        returns) > 1 else float('nan')
    return float(returns.mean()), float(stderr)


@dataclass
class EvalReport():
    """Per-scenario utilities and regrets of one policy."""
    scenario_ids: list[str]
    utility: np.ndarray
    best_response: np.ndarray
    exact: np.ndarray
    weights: Optional[np.ndarray] = None

    @property
    def regret(self) -> np.ndarray:
        return self.best_response - self.utility

    @property
    def bayes_utility(self) -> float:
        w = self._weights()
        return float(w @ self.utility)

    @property
    def bayes_regret(self) -> float:
        w = self._weights()
        return float(w @ self.regret)

    def _weights(self):
        if self.weights is None:
            return np.full(len(self.utility), 1 / len(self.utility))
        return self.weights

    def rows(self) -> list[dict]:
        return [{
            'scenario_id': sid,
            'utility': float(u),
            'best_response': float(b),
            'exact_flag': bool(e),
            'regret': float(b - u),
        } for sid, u, b, e in zip(self.scenario_ids, self.utility,
                                  self.best_response, self.exact)]

    def to_dict(self) -> dict:
        return {
            'scenarios': self.rows(),
            'bayes_utility': self.bayes_utility,
            'bayes_regret': self.bayes_regret,
        }


def evaluate_report(policy: Policy,
                    scenario_set: ScenarioSet,
                    policies: Mapping[str, Policy],
                    prior: Optional[Prior] = None,
                    cache: Optional[ResponseCache] = None,
                    workers: Optional[int] = None) -> EvalReport:
    cache = cache or ResponseCache(policies)
    best, exact = cache.values(scenario_set)
    u = utilities(policy, scenario_set, policies, workers)
    weights = None if prior is None else _aligned(prior, scenario_set)
    bad = (best - u < -REGRET_TOLERANCE) & exact
    if np.any(bad):
        log.warning('negative regret on %s; best responses may be wrong',
                    [scenario_set[i].id for i in np.flatnonzero(bad)])
    return EvalReport(scenario_set.ids, u, best, exact, weights)
