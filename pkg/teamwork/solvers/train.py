from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from ..exact import Prior, ResponseCache
from ..game import RepeatedGame, ScenarioSet, build_scenario_set
from ..policies.base import Policy
from ..policies.tabular import SoftmaxPolicy, StochasticPolicy
from ..progress import Progress
from ..scenario import ScenarioBatch
from .baselines import run_fictitious_play
from .config import SolverConfig
from .gda import IterateTracker, SolverTrace, run_gda
from .sgda import run_sgda

log = logging.getLogger(__name__)


@dataclass
class TrainResult():
    policy: Policy
    prior: Prior
    trace: SolverTrace
    config: SolverConfig


def _random(config, game, scenario_set, policies, cache):
    """The uniform policy with a one-row trace."""
    policy = StochasticPolicy.uniform(game, 'random')
    beta = Prior.uniform(scenario_set).weights
    best, _ = cache.values(scenario_set)
    U = ScenarioBatch(scenario_set, policies).utilities(policy.table(game))
    tracker = IterateTracker(config.replace(iterate_selection='last'),
                             scenario_set)
    tracker.record(0, np.zeros_like(policy.probabilities), beta, U, best, 0.0)
    trace = tracker.finish(np.zeros_like(policy.probabilities), beta)
    return policy, trace


def train(config: SolverConfig,
          game: RepeatedGame,
          population: Mapping[str, Policy],
          scenario_set: Optional[ScenarioSet] = None,
          cache: Optional[ResponseCache] = None,
          progress: Optional[Progress] = None,
          workers: Optional[int] = None) -> TrainResult:
    """Train a focal policy with ``config.method`` on ``population``.

    The scenario set defaults to every focal count with the universalisation
    scenario.
    """
    if scenario_set is None:
        scenario_set = build_scenario_set(game, population)
    cache = cache or ResponseCache(population, config.seed)
    if progress is not None:
        progress.max = config.iterations
    if config.method == 'RANDOM':
        policy, trace = _random(config, game, scenario_set, population, cache)
    else:
        if config.method == 'FP':
            if config.mode == 'stochastic':
                log.warning('FP always trains with exact gradients')
            trace = run_fictitious_play(config, game, scenario_set,
                                        population, cache, progress)
        elif config.mode == 'stochastic':
            trace = run_sgda(config, game, scenario_set, population, cache,
                             progress, workers)
        else:
            trace = run_gda(config, game, scenario_set, population, cache,
                            progress)
        policy = SoftmaxPolicy(game, trace.theta, config.method.lower())
    prior = Prior(trace.beta, scenario_set)
    return TrainResult(policy, prior, trace, config)
