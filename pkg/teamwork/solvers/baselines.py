"""Priors and training loop of the PBR, SP and FP baselines."""
from __future__ import annotations

import logging
from typing import Mapping, Optional

import numpy as np

from ..exact import Prior, ResponseCache
from ..game import RepeatedGame, Scenario, ScenarioSet
from ..policies.base import Policy
from ..policies.population import PolicySet
from ..policies.tabular import SoftmaxPolicy
from ..progress import Progress
from ..scenario import ScenarioBatch
from .config import SolverConfig
from .gda import IterateTracker, SolverTrace, initial_prior, initial_theta

log = logging.getLogger(__name__)


def snapshot_name(iteration: int) -> str:
    return f'fp@{iteration:06d}'


def fp_snapshot_iterations(t: int, interval: int) -> list[int]:
    """Iterations whose snapshots FP plays against at iteration ``t``."""
    if interval < 1:
        raise ValueError('snapshot interval must be positive')
    return list(range(0, t + 1, interval))


def fp_scenario_set(game: RepeatedGame, names) -> ScenarioSet:
    m = game.num_players
    return ScenarioSet(game,
                       tuple(Scenario(1, (n, ) * (m - 1)) for n in names),
                       'fp')


def build_baseline_prior(method: str,
                         scenario_set: ScenarioSet,
                         t: int = 0,
                         snapshots: Optional[Mapping[int, Policy]] = None
                         ) -> Prior:
    """Prior each baseline trains on.

    PBR is uniform over the set and SP a Dirac on the universalisation
    scenario.  FP is uniform over scenarios pairing one focal player with a
    stored snapshot taken at or before iteration ``t``; its prior lives on
    that snapshot scenario set.
    """
    method = method.upper()
    if method == 'PBR':
        return Prior.uniform(scenario_set)
    if method == 'SP':
        return Prior(initial_prior(SolverConfig(method='SP'), scenario_set),
                     scenario_set)
    if method == 'FP':
        if not snapshots:
            raise ValueError('FP needs at least one snapshot')
        names = [snapshot_name(k) for k in sorted(snapshots) if k <= t]
        if not names:
            raise ValueError(f'no snapshot taken at or before iteration {t}')
        fp_set = fp_scenario_set(scenario_set.game, names)
        return Prior.uniform(fp_set)
    raise ValueError(f'{method} has no baseline prior')


def fp_trace_prior(scenario_set: ScenarioSet) -> np.ndarray:
    """Training-set prior written to FP traces: a Dirac on the
    universalisation scenario, or uniform when the set has none."""
    i = scenario_set.universalisation_index
    if i is None:
        return Prior.uniform(scenario_set).weights
    return Prior.dirac(scenario_set, scenario_set[i]).weights


def run_fictitious_play(config: SolverConfig,
                        game: RepeatedGame,
                        scenario_set: ScenarioSet,
                        policies: Mapping[str, Policy],
                        cache: Optional[ResponseCache] = None,
                        progress: Optional[Progress] = None) -> SolverTrace:
    """Policy gradient against a uniform mixture of past snapshots.

    A snapshot is stored every ``fp_snapshot_interval`` iterations starting
    with the initial policy; the trace keeps them in ``snapshots``.  The
    trace reports utilities on the training set.
    """
    if config.method != 'FP':
        raise ValueError('run_fictitious_play runs FP only')
    train = ScenarioBatch(scenario_set, policies)
    cache = cache or ResponseCache(policies, config.seed)
    best, _ = cache.values(scenario_set)
    policy = SoftmaxPolicy(game, initial_theta(config, game), 'fp')
    beta = fp_trace_prior(scenario_set)
    snapshots = PolicySet()
    fp_batch = None
    tracker = IterateTracker(config, scenario_set, progress)
    taken = tracker.trace.snapshots
    interval = config.snapshot_interval
    log.info('FP: %d iterations, snapshot every %d', config.iterations,
             interval)
    for t in range(config.iterations + 1):
        pi = policy.probabilities
        U = train.utilities(pi)
        grad = None
        if t < config.iterations:
            if t % interval == 0:
                snap = policy.snapshot(snapshot_name(t))
                snapshots.add(snap)
                taken[t] = snap
                prior = build_baseline_prior('FP', scenario_set, t, taken)
                fp_batch = ScenarioBatch(prior.scenario_set, snapshots)
                log.debug('FP stored snapshot %d (%d total)', t, len(taken))
            _, grad = fp_batch.gradient(pi, prior.weights)
        norm = 0.0 if grad is None else float(np.linalg.norm(grad))
        tracker.record(t, policy.theta, beta, U, best, norm)
        if grad is None:
            break
        policy.update(config.eta_theta * grad)
    return tracker.finish(policy.theta, beta)
