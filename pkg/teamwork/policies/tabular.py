from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.special import softmax

from ..errors import UnknownHistoryError
from ..game import History, RepeatedGame
from .base import Policy, _tree_key, check_distribution


class TabularPolicy(Policy):
    """Base of policies stored as one row per perspective history."""

    def __init__(self, game: RepeatedGame, name: Optional[str] = None):
        super().__init__(name)
        self.game = game

    @property
    def probabilities(self) -> np.ndarray:
        raise NotImplementedError()

    def probs(self, view: History) -> np.ndarray:
        try:
            node = self.game.tree.node_id(view)
        except UnknownHistoryError as e:
            raise UnknownHistoryError(
                f'policy {self.name!r} has no row for {view}: {e}') from None
        return self.probabilities[node].copy()

    def table(self, game: RepeatedGame) -> np.ndarray:
        if _tree_key(game.tree) != _tree_key(self.game.tree):
            raise UnknownHistoryError(
                f'policy {self.name!r} was built for a different game tree')
        return self.probabilities


class StochasticPolicy(TabularPolicy):
    """Frozen probability table."""

    def __init__(self,
                 game: RepeatedGame,
                 probs: np.ndarray,
                 name: Optional[str] = None,
                 meta: Optional[dict] = None):
        super().__init__(game, name)
        probs = np.array(probs, dtype=float)
        tree = game.tree
        if probs.shape != (tree.num_nodes, tree.num_actions):
            raise ValueError(f'table shape {probs.shape} does not match '
                             f'({tree.num_nodes}, {tree.num_actions})')
        check_distribution(probs, f' in policy {name!r}')
        probs = np.clip(probs, 0, None)
        probs /= probs.sum(axis=1, keepdims=True)
        probs.setflags(write=False)
        self._probs = probs
        self.meta = dict(meta or {})

    @property
    def probabilities(self) -> np.ndarray:
        return self._probs

    @classmethod
    def uniform(cls, game: RepeatedGame, name: Optional[str] = None):
        tree = game.tree
        return cls(game, np.full((tree.num_nodes, tree.num_actions),
                                 1 / tree.num_actions), name)

    @classmethod
    def from_policy(cls, game: RepeatedGame, policy: Policy,
                    name: Optional[str] = None):
        return cls(game, policy.table(game), name or policy.name)


class SoftmaxPolicy(TabularPolicy):
    """Softmax over a mutable parameter table ``theta``.

    Only the owning solver writes to ``theta``; everyone else reads
    snapshots.
    """

    def __init__(self,
                 game: RepeatedGame,
                 theta: Optional[np.ndarray] = None,
                 name: Optional[str] = None):
        super().__init__(game, name)
        tree = game.tree
        shape = (tree.num_nodes, tree.num_actions)
        if theta is None:
            theta = np.zeros(shape)
        theta = np.array(theta, dtype=float)
        if theta.shape != shape:
            raise ValueError(
                f'theta shape {theta.shape} does not match {shape}')
        self._theta = theta
        self._cached = None

    @property
    def theta(self) -> np.ndarray:
        return self._theta

    @theta.setter
    def theta(self, value: np.ndarray):
        value = np.asarray(value, dtype=float)
        if value.shape != self._theta.shape:
            raise ValueError(f'theta shape {value.shape} does not match '
                             f'{self._theta.shape}')
        self._theta = value.copy()
        self._cached = None

    def update(self, step: np.ndarray):
        """In-place ``theta += step``."""
        self._theta += step
        self._cached = None

    @property
    def probabilities(self) -> np.ndarray:
        if self._cached is None:
            self._cached = softmax(self._theta, axis=1)
            self._cached.setflags(write=False)
        return self._cached

    def snapshot(self, name: Optional[str] = None) -> StochasticPolicy:
        """Immutable copy of the current action probabilities."""
        return StochasticPolicy(self.game, self.probabilities, name
                                or self.name)


def snapshot(policy: SoftmaxPolicy,
             name: Optional[str] = None) -> StochasticPolicy:
    return policy.snapshot(name)


def deterministic_policy(game: RepeatedGame,
                         actions: np.ndarray,
                         name: Optional[str] = None) -> StochasticPolicy:
    """One-hot table from an action index per node."""
    tree = game.tree
    probs = np.zeros((tree.num_nodes, tree.num_actions))
    probs[np.arange(tree.num_nodes), np.asarray(actions, dtype=int)] = 1.0
    return StochasticPolicy(game, probs, name)


def constant_policy(game: RepeatedGame,
                    action: str,
                    name: Optional[str] = None) -> StochasticPolicy:
    """Play ``action`` at every history."""
    a = game.action_index(action)
    return deterministic_policy(game, np.full(game.tree.num_nodes, a), name
                                or f'always_{action}')
