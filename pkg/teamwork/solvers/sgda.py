"""Stochastic descent-ascent: sampled scenarios and rollout estimates."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Mapping, Optional

import numpy as np

from ..errors import EnumerationLimitError
from ..exact import ResponseCache
from ..game import RepeatedGame, ScenarioSet
from ..policies.base import Policy
from ..policies.tabular import SoftmaxPolicy
from ..progress import Progress
from ..scenario import EpisodeSampler, ScenarioBatch
from ..seeding import stream
from .config import SolverConfig
from .gda import (IterateTracker, SolverTrace, initial_prior, initial_theta,
                  mix_floor, update_prior)

log = logging.getLogger(__name__)


def score_gradient(batch: ScenarioBatch, s: int, focal: np.ndarray,
                   returns: np.ndarray, visits, delayed: bool,
                   baseline: bool) -> np.ndarray:
    """Likelihood-ratio estimate of ``grad_theta U(pi, s)`` from rollouts.

    With ``baseline`` each return is centred on the mean return of the
    other rollouts of the same scenario.
    """
    n = len(returns)
    adv = returns.copy()
    if baseline and n > 1:
        adv -= (returns.sum() - returns) / (n - 1)
    c = int(batch.focal_counts[s])
    slots = [0] if delayed else range(c)
    A = batch.tree.num_actions
    grad = np.zeros_like(focal)
    eye = np.eye(A)
    for nodes, actions in visits:
        for i in slots:
            k = nodes[:, i]
            score = eye[actions[:, i]] - focal[k]
            np.add.at(grad, k, adv[:, None] * score)
    return grad / n


def run_sgda(config: SolverConfig,
             game: RepeatedGame,
             scenario_set: ScenarioSet,
             policies: Mapping[str, Policy],
             cache: Optional[ResponseCache] = None,
             progress: Optional[Progress] = None,
             workers: Optional[int] = None) -> SolverTrace:
    """Sampled descent-ascent.

    Each iteration draws ``batch_size`` scenarios from the floored prior
    (or sweeps every scenario once when the batch covers the set), estimates
    their utilities by rollouts, and takes importance-corrected prior steps
    and likelihood-ratio policy steps.  Best-response values are exact and
    computed once.  Every draw comes from a stream keyed by seed, iteration
    and scenario, so results do not depend on ``workers``.

    Past the enumeration limit the rollouts look histories up one at a time
    and only MU, PBR and SP with the rollout estimator run; best responses
    are unknown there, so the trace has no regrets.
    """
    if config.method not in ('MU', 'MR', 'PBR', 'SP'):
        raise ValueError(f'run_sgda does not handle method {config.method}')
    if len(scenario_set) == 0:
        raise ValueError('scenario set is empty')
    K = len(scenario_set)
    if game.tree.enumerable:
        batch = ScenarioBatch(scenario_set, policies)
        cache = cache or ResponseCache(policies, config.seed)
        best, _ = cache.values(scenario_set)
    else:
        if config.method == 'MR' or config.estimator == 'exact':
            raise EnumerationLimitError(
                f'{config.method} with the {config.estimator} estimator needs '
                f'exact values, but the game has {game.tree.num_leaves} '
                f'leaves')
        log.warning('%d leaves: sampling histories one at a time, regrets '
                    'are not tracked', game.tree.num_leaves)
        batch = EpisodeSampler(scenario_set, policies)
        best = np.full(K, np.nan)
    B = config.batch_size
    full = B >= K
    policy = SoftmaxPolicy(game, initial_theta(config, game),
                           config.method.lower())
    beta = initial_prior(config, scenario_set)
    delayed = config.copy_mode == 'delayed' and np.any(
        batch.focal_counts > 1)
    copy = None
    estimates = np.full(K, np.nan)
    tracker = IterateTracker(config, scenario_set, progress)
    pool = (ThreadPoolExecutor(max_workers=workers)
            if workers is not None and workers > 1 else None)

    def rollout(t, pi, s, num):
        rng = stream(config.seed, 'rollout', t, s)
        returns, visits = batch.rollouts(s, pi, rng, num,
                                         copy if delayed else None)
        g = score_gradient(batch, s, pi, returns, visits, delayed,
                           config.baseline)
        return returns.mean(), g

    log.info('%s (stochastic): %d iterations, batch %d over %d scenarios',
             config.method, config.iterations, B, K)
    try:
        for t in range(config.iterations + 1):
            pi = policy.probabilities
            weights = mix_floor(beta, config.floor)
            if t == config.iterations:
                if config.estimator == 'exact':
                    estimates = batch.utilities(pi)
                tracker.record(t, policy.theta, beta, estimates, best, 0.0)
                break
            if delayed and t % config.delay == 0:
                copy = pi.copy()
            if full:
                sampled = np.arange(K)
                counts = np.ones(K)
                theta_w = weights
            else:
                rng = stream(config.seed, 'scenarios', t)
                sampled = rng.choice(K, size=B, p=weights)
                counts = np.bincount(sampled, minlength=K).astype(float)
                sampled = np.flatnonzero(counts)
                theta_w = counts / B

            if config.estimator == 'exact':
                exact_w = np.zeros(K)
                exact_w[sampled] = theta_w[sampled]
                U, grad = batch.gradient(pi, exact_w,
                                         copy if delayed else None)
                if delayed:
                    U = batch.utilities(pi)
                u_hat = U[sampled]
            else:
                nums = [config.num_rollouts * int(counts[s]) for s in sampled]
                jobs = [(t, pi, s, n) for s, n in zip(sampled, nums)]
                if pool is None:
                    results = [rollout(*job) for job in jobs]
                else:
                    results = list(pool.map(lambda job: rollout(*job), jobs))
                u_hat = np.array([r[0] for r in results])
                grad = np.zeros_like(pi)
                for s, (_, g) in zip(sampled, results):
                    grad += theta_w[s] * g
            estimates[sampled] = u_hat

            if full:
                g_u = estimates.copy()
            else:
                # importance-weighted by the floored sampling prior
                g_u = np.zeros(K)
                g_u[sampled] = counts[sampled] * u_hat / (B *
                                                          weights[sampled])
            g_r = np.zeros(K)
            if full:
                g_r = best - g_u
            else:
                g_r[sampled] = counts[sampled] * (best[sampled] - u_hat) / (
                    B * weights[sampled])

            tracker.record(t, policy.theta, beta, estimates, best,
                           float(np.linalg.norm(grad)))
            beta = update_prior(config.method, beta, config.eta_beta, g_u,
                                g_r)
            policy.update(config.eta_theta * grad)
    finally:
        if pool is not None:
            pool.shutdown()
    return tracker.finish(policy.theta, beta)
