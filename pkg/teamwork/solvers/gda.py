"""Gradient descent-ascent between a softmax focal policy and a prior over
training scenarios."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from ..errors import DivergenceError
from ..exact import Prior, ResponseCache
from ..game import RepeatedGame, ScenarioSet
from ..policies.base import Policy
from ..policies.tabular import SoftmaxPolicy
from ..progress import Progress
from ..scenario import ScenarioBatch
from ..seeding import stream
from .config import SolverConfig
from .simplex import project_simplex

log = logging.getLogger(__name__)

THETA_LIMIT = 1e4


@dataclass
class TraceRecord():
    iteration: int
    beta: np.ndarray
    bayes_utility: float
    bayes_regret: float
    utilities: np.ndarray
    u_min: float
    r_max: float
    grad_norm_theta: float


@dataclass
class SolverTrace():
    """Per-iteration records of a run and the returned pair."""
    method: str
    scenario_ids: list[str]
    records: list[TraceRecord] = field(default_factory=list)
    theta: Optional[np.ndarray] = None
    beta: Optional[np.ndarray] = None
    selected: Optional[int] = None
    snapshots: dict[int, Policy] = field(default_factory=dict)

    @property
    def last(self) -> TraceRecord:
        return self.records[-1]

    @property
    def selected_record(self) -> TraceRecord:
        for r in self.records:
            if r.iteration == self.selected:
                return r
        return self.last

    def columns(self) -> list[str]:
        return ['iter', *(f'beta_{k}' for k in range(len(self.scenario_ids))),
                'bayes_utility', 'bayes_regret', 'u_min', 'r_max',
                'grad_norm_theta']

    def rows(self) -> list[list]:
        return [[
            r.iteration, *(float(b) for b in r.beta), r.bayes_utility,
            r.bayes_regret, r.u_min, r.r_max, r.grad_norm_theta
        ] for r in self.records]


def selection_score(method: str, record: TraceRecord) -> Optional[float]:
    """Objective used by ``iterate_selection='best_worst_case'``.

    FP has none: its objective is the utility against its own snapshot
    mixture, which changes as snapshots are added, so the latest iterate is
    kept.
    """
    if method == 'FP':
        return None
    if method == 'MU':
        return record.u_min
    if method == 'MR':
        return -record.r_max
    return record.bayes_utility


class IterateTracker():
    """Records iterates, guards against divergence and keeps the selected
    ``(theta, beta)`` without storing the whole trajectory."""

    def __init__(self, config: SolverConfig, scenario_set: ScenarioSet,
                 progress: Optional[Progress] = None):
        self.config = config
        self.trace = SolverTrace(config.method, scenario_set.ids)
        self.progress = progress
        self._best = None
        self._pick = None
        if config.iterate_selection == 'uniform_random':
            rng = stream(config.seed, 'select')
            self._pick = int(rng.integers(1, config.iterations + 1))

    def record(self, t: int, theta: np.ndarray, beta: np.ndarray,
               utilities: np.ndarray, best: np.ndarray, grad_norm: float):
        with np.errstate(invalid='ignore'):
            regrets = best - utilities
            u_min = float(np.nanmin(utilities)) if np.any(
                np.isfinite(utilities)) else float('nan')
            r_max = float(np.nanmax(regrets)) if np.any(
                np.isfinite(regrets)) else float('nan')
            seen = np.isfinite(utilities)
            bu = float(beta[seen] @ utilities[seen])
            br = float(beta[seen] @ regrets[seen])
        rec = TraceRecord(t, beta.copy(), bu, br, utilities.copy(), u_min,
                          r_max, float(grad_norm))
        self.trace.records.append(rec)
        if not np.all(np.isfinite(theta)) or np.abs(theta).max(
        ) > THETA_LIMIT or not np.isfinite(bu):
            msg = (f'{self.config.method} diverged at iteration {t}: '
                   f'max |theta| = {np.abs(theta).max():g}, '
                   f'bayes utility = {bu:g}')
            log.error(msg)
            raise DivergenceError(msg, self.trace)
        if t >= 1:
            self._select(t, theta, beta, rec)
        if self.progress is not None and t >= 1:
            self.progress.next()
        return rec

    def _select(self, t, theta, beta, rec):
        how = self.config.iterate_selection
        if how == 'last' or (how == 'uniform_random' and t == self._pick):
            self._keep(t, theta, beta)
        elif how == 'best_worst_case':
            score = selection_score(self.config.method, rec)
            if score is None:
                self._keep(t, theta, beta)
            elif self._best is None or score > self._best:
                self._best = score
                self._keep(t, theta, beta)

    def _keep(self, t, theta, beta):
        self.trace.selected = t
        self.trace.theta = theta.copy()
        self.trace.beta = beta.copy()

    def finish(self, theta: np.ndarray, beta: np.ndarray) -> SolverTrace:
        if self.trace.theta is None:
            self._keep(self.trace.last.iteration, theta, beta)
        log.info('%s finished after %d iterations, selected iterate %d',
                 self.config.method, self.trace.last.iteration,
                 self.trace.selected)
        return self.trace


def initial_theta(config: SolverConfig, game: RepeatedGame) -> np.ndarray:
    tree = game.tree
    rng = stream(config.seed, 'init')
    return config.theta_init_scale * rng.normal(size=(tree.num_nodes,
                                                      tree.num_actions))


def initial_prior(config: SolverConfig,
                  scenario_set: ScenarioSet) -> np.ndarray:
    if config.method == 'SP':
        i = scenario_set.universalisation_index
        if i is None:
            raise ValueError('SP needs the universalisation scenario in the '
                             'scenario set')
        return Prior.dirac(scenario_set, scenario_set[i]).weights
    return Prior.uniform(scenario_set).weights


def mix_floor(beta: np.ndarray, floor: float) -> np.ndarray:
    return (1 - floor) * beta + floor / len(beta)


def update_prior(method: str, beta: np.ndarray, eta: float,
                 utilities: np.ndarray, regrets: np.ndarray) -> np.ndarray:
    """One projected step of nature: descend utility (MU) or ascend regret
    (MR)."""
    if eta == 0 or method not in ('MU', 'MR'):
        return beta
    if method == 'MU':
        return project_simplex(beta - eta * utilities)
    return project_simplex(beta + eta * regrets)


def run_gda(config: SolverConfig,
            game: RepeatedGame,
            scenario_set: ScenarioSet,
            policies: Mapping[str, Policy],
            cache: Optional[ResponseCache] = None,
            progress: Optional[Progress] = None) -> SolverTrace:
    """Full-information descent-ascent.

    Each iteration evaluates every scenario exactly, moves the prior by a
    projected step on the utility (MU) or regret (MR) vector and the policy
    by an exact policy-gradient step on ``U(pi, beta_eff)``.
    """
    if config.method not in ('MU', 'MR', 'PBR', 'SP'):
        raise ValueError(f'run_gda does not handle method {config.method}')
    if len(scenario_set) == 0:
        raise ValueError('scenario set is empty')
    batch = ScenarioBatch(scenario_set, policies)
    cache = cache or ResponseCache(policies, config.seed)
    best, exact = cache.values(scenario_set)
    if config.method == 'MR' and not np.all(exact):
        log.warning('MR uses best-response bounds for %s', [
            s.id for s, e in zip(scenario_set, exact) if not e
        ])
    policy = SoftmaxPolicy(game, initial_theta(config, game),
                           config.method.lower())
    beta = initial_prior(config, scenario_set)
    delayed = config.copy_mode == 'delayed' and np.any(
        batch.focal_counts > 1)
    copy = None
    tracker = IterateTracker(config, scenario_set, progress)
    log.info('%s: %d iterations over %d scenarios', config.method,
             config.iterations, len(scenario_set))
    for t in range(config.iterations + 1):
        pi = policy.probabilities
        weights = mix_floor(beta, config.floor)
        grad = None
        if t == config.iterations:
            U = batch.utilities(pi)
        elif delayed:
            if t % config.delay == 0:
                copy = pi.copy()
                log.debug('refreshed focal copy at iteration %d', t)
            U = batch.utilities(pi)
            _, grad = batch.gradient(pi, weights, copy)
        else:
            U, grad = batch.gradient(pi, weights)
        norm = 0.0 if grad is None else float(np.linalg.norm(grad))
        tracker.record(t, policy.theta, beta, U, best, norm)
        if grad is None:
            break
        beta = update_prior(config.method, beta, config.eta_beta, U, best - U)
        policy.update(config.eta_theta * grad)
    return tracker.finish(policy.theta, beta)
