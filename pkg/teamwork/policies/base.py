from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Optional, Sequence

import numpy as np

from ..errors import InvalidDistributionError
from ..game import History, HistoryTree, RepeatedGame, perspective

TOLERANCE = 1e-9


def check_distribution(p: np.ndarray, where: str = '', tol: float = TOLERANCE):
    """Raise InvalidDistributionError unless every row of ``p`` is a
    probability vector."""
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)) or np.any(p < -tol):
        raise InvalidDistributionError(
            f'negative or non-finite probabilities{where}: {p.tolist()}'
            if p.ndim == 1 else f'negative or non-finite probabilities{where}')
    total = p.sum(axis=-1)
    if np.any(np.abs(total - 1) > tol):
        bad = np.max(np.abs(total - 1))
        raise InvalidDistributionError(
            f'probabilities{where} sum to 1 only within {bad:.3g}')
    return p


class Policy(ABC):
    """History-conditioned action distribution.

    Every policy observes the shared joint history rotated to its own
    perspective: ``view[t][0]`` is its own action at step t and
    ``view[t][k]`` the action of the player k seats after it.
    """

    def __init__(self, name: Optional[str] = None):
        self.name = name

    @abstractmethod
    def probs(self, view: History) -> np.ndarray:
        """Action distribution at a perspective history."""

    def act(self, history: Sequence[Sequence[int]],
            role_index: int = 0) -> np.ndarray:
        p = self.probs(perspective(history, role_index))
        return check_distribution(p, f' at history {tuple(history)}')

    def table(self, game: RepeatedGame) -> np.ndarray:
        """``(num_nodes, num_actions)`` table over perspective histories."""
        tree = game.tree
        cache = self.__dict__.setdefault('_tables', {})
        key = _tree_key(tree)
        if key not in cache:
            tab = np.array([self.probs(h) for h in tree.histories()],
                           dtype=float).reshape(tree.num_nodes,
                                                tree.num_actions)
            check_distribution(tab, f' in policy {self.name!r}')
            tab.setflags(write=False)
            cache[key] = tab
        return cache[key]

    def __repr__(self):
        return f'{self.__class__.__name__}({self.name!r})'


def _tree_key(tree: HistoryTree):
    return (tree.num_players, tree.num_actions, tree.horizon)
