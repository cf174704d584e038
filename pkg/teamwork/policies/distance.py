"""Total-variation distances between policies and scenarios, and sampling
of policies inside a distance ball."""
from __future__ import annotations

import itertools
from typing import Mapping, Optional

import numpy as np

from ..game import RepeatedGame, Scenario
from .base import Policy
from .tabular import StochasticPolicy


def policy_distance(p1: Policy, p2: Policy, game: RepeatedGame) -> float:
    """Maximum over decision histories of the L1 distance between the two
    action distributions."""
    t1, t2 = p1.table(game), p2.table(game)
    return float(np.abs(t1 - t2).sum(axis=1).max())


def _vector_distance(tables1, tables2, game: RepeatedGame,
                     first_slot: int) -> float:
    tree = game.tree
    diffs = [np.abs(a - b).sum(axis=1) for a, b in zip(tables1, tables2)]
    worst = 0.0
    for t, view in enumerate(tree.views):
        total = np.zeros(tree.sizes[t])
        for k, d in enumerate(diffs):
            total += d[view[first_slot + k]]
        worst = max(worst, float(total.max()))
    return worst


def scenario_distance(s1: Scenario, s2: Scenario, policies: Mapping[str,
                                                                    Policy],
                      game: RepeatedGame) -> float:
    """Distance of two scenarios with the same focal count.

    For each pairing of background slots, the per-history distance sums the
    L1 gaps of every background player at its own perspective; the result
    is the max over histories, minimized over pairings.
    """
    if s1.focal_count != s2.focal_count:
        raise ValueError(
            'scenarios can only be compared with equal focal counts, '
            f'got {s1.focal_count} and {s2.focal_count}')
    if len(s1.background) != len(s2.background):
        raise ValueError('scenarios have different player counts')
    if not s1.background:
        return 0.0
    tables1 = [policies[b].table(game) for b in s1.background]
    tables2 = [policies[b].table(game) for b in s2.background]
    best = np.inf
    for perm in set(itertools.permutations(range(len(tables2)))):
        d = _vector_distance(tables1, [tables2[i] for i in perm], game,
                             s1.focal_count)
        best = min(best, d)
        if best == 0:
            break
    return float(best)


def sample_epsilon_ball(base: Policy,
                        epsilon: float,
                        rng: np.random.Generator,
                        game: RepeatedGame,
                        name: Optional[str] = None) -> StochasticPolicy:
    """Random stochastic policy strictly within ``epsilon`` of ``base``.

    Each history row moves from the base row ``p0`` toward a point ``q``
    drawn uniformly from the simplex, by an L1 length drawn with the radial
    law of a uniform ball of radius ``epsilon * (1 - 1e-9)``; the move is cut
    at ``q`` so rows stay on the simplex.  ``epsilon == 0`` copies the base.
    """
    if epsilon < 0:
        raise ValueError(f'epsilon must be non-negative, got {epsilon}')
    p0 = np.asarray(base.table(game), dtype=float)
    name = name or base.name
    if epsilon == 0:
        return StochasticPolicy(game, p0, name)
    n, A = p0.shape
    radius = min(epsilon, 2.0) * (1 - 1e-9)
    q = rng.dirichlet(np.ones(A), size=n)
    length = radius * rng.random(n)**(1 / (A - 1))
    span = np.abs(q - p0).sum(axis=1)
    with np.errstate(divide='ignore', invalid='ignore'):
        lam = np.where(span > 0, np.minimum(1.0, length / span), 0.0)
    probs = p0 + lam[:, None] * (q - p0)
    probs = np.clip(probs, 0, None)
    probs /= probs.sum(axis=1, keepdims=True)
    return StochasticPolicy(game, probs, name)
