"""Background populations trained by population play under social and
risk preferences."""
from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np

from ..game import RepeatedGame, Scenario, ScenarioSet
from ..policies.population import PolicySet
from ..policies.social import (DELTA_RANGE, LAMBDA_RANGE, SocialPrefs,
                               sample_prefs, social_payoff)
from ..policies.tabular import SoftmaxPolicy, StochasticPolicy
from ..progress import Progress
from ..scenario import ScenarioBatch
from ..seeding import stream

log = logging.getLogger(__name__)


def member_name(group: int, k: int) -> str:
    return f'sub{group}_{k}'


def _step(game: RepeatedGame, learner: str, partners: Sequence[str],
          members: dict[str, SoftmaxPolicy],
          prefs: SocialPrefs) -> np.ndarray:
    """Exact policy gradient of one member in seat 0 on its own social
    reward, the partners held fixed."""
    scenario = Scenario(1, tuple(partners))
    batch = ScenarioBatch(ScenarioSet(game, (scenario, ), 'pp'), members,
                          social_payoff(game, 0, prefs))
    _, grad = batch.gradient(members[learner].probabilities, np.ones(1))
    return grad


def train_background(game: RepeatedGame,
                     sizes: Sequence[int] = (2, 3, 5),
                     seed: int = 0,
                     iterations: int = 1000,
                     eta: float = 0.5,
                     lam_range: tuple[float, float] = LAMBDA_RANGE,
                     delta_range: tuple[float, float] = DELTA_RANGE,
                     progress: Optional[Progress] = None) -> PolicySet:
    """Train one population per entry of ``sizes`` and return their union.

    Every member draws its own preferences.  Each iteration a sub-population
    fills all seats with uniformly drawn members; every drawn member takes a
    policy-gradient step on its social reward against the others.

    Returns:
        frozen policies labelled ``sub<g>`` with their preferences in
        ``meta``.
    """
    if not game.symmetric:
        raise ValueError('population play needs a symmetric game')
    if not sizes or any(n < 1 for n in sizes):
        raise ValueError(f'invalid sub-population sizes {sizes}')
    game.tree.check_enumerable()
    m = game.num_players
    ret = PolicySet()
    if progress is not None:
        progress.max = iterations * len(sizes)
    for g, size in enumerate(sizes):
        prefs, members = {}, {}
        for k in range(size):
            name = member_name(g, k)
            prefs[name] = sample_prefs(stream(seed, 'prefs', g, k), lam_range,
                                       delta_range)
            rng = stream(seed, 'init', g, k)
            tree = game.tree
            members[name] = SoftmaxPolicy(
                game, 0.01 * rng.normal(size=(tree.num_nodes,
                                              tree.num_actions)), name)
        names = list(members)
        log.info('sub-population %d: %d members', g, size)
        for t in range(iterations):
            rng = stream(seed, 'pairing', g, t)
            seats = [names[i] for i in rng.integers(0, size, size=m)]
            steps = {}
            for i, learner in enumerate(seats):
                if learner in steps:
                    continue
                partners = seats[:i] + seats[i + 1:]
                steps[learner] = _step(game, learner, partners, members,
                                       prefs[learner])
            for learner, grad in steps.items():
                members[learner].update(eta * grad)
            if progress is not None:
                progress.next()
        for name in names:
            ret.add(
                StochasticPolicy(game, members[name].probabilities, name,
                                 {'prefs': prefs[name].to_dict()}), f'sub{g}')
    return ret
