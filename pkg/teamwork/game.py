"""Finite-horizon repeated normal-form games and scenario sets.

The state of a repeated matrix game is the joint-action history, so the
history tree is the whole game tree.  Histories are numbered depth by depth:
a history of length ``t`` whose steps have joint-action indices
``j_1, ..., j_t`` has local index ``j_1 J^(t-1) + ... + j_t`` and global node
id ``offsets[t] + local`` where ``J = |A|^m``.  Joint-action indices are
lexicographic with player 0 most significant, the same order as
``payoff.reshape(J, m)``.
"""
from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import EnumerationLimitError, UnknownHistoryError

log = logging.getLogger(__name__)

MAX_LEAVES = 10**7

JointAction = tuple[int, ...]
History = tuple[JointAction, ...]


@dataclass(frozen=True, eq=False)
class RepeatedGame():
    """A repeated m-player normal-form game.

    Args:
        actions: action labels, shared by every player.
        payoff: tensor of shape ``(|A|,) * m + (m,)``; ``payoff[a_1..a_m]`` is
            the reward vector of the joint action.
        horizon: number of rounds T.
        name: label used in files and reports.
        symmetric: if set, player symmetry is checked at construction.
    """
    actions: tuple[str, ...]
    payoff: np.ndarray
    horizon: int
    name: str = 'game'
    symmetric: bool = False

    def __post_init__(self):
        actions = tuple(str(a) for a in self.actions)
        payoff = np.array(self.payoff, dtype=float)
        if len(actions) < 2 or len(set(actions)) != len(actions):
            raise ValueError(f'actions must be distinct labels, got {actions}')
        m = payoff.ndim - 1
        if m < 2 or payoff.shape != (len(actions), ) * m + (m, ):
            raise ValueError(
                f'payoff shape {payoff.shape} does not match '
                f'{len(actions)} actions for {payoff.shape[-1]} players')
        if not np.all(np.isfinite(payoff)):
            raise ValueError('payoff entries must be finite')
        if int(self.horizon) < 1:
            raise ValueError('horizon must be positive')
        payoff.setflags(write=False)
        object.__setattr__(self, 'actions', actions)
        object.__setattr__(self, 'payoff', payoff)
        object.__setattr__(self, 'horizon', int(self.horizon))
        if self.symmetric and not self.is_symmetric():
            raise ValueError(f'game {self.name!r} is flagged symmetric but '
                             'permuting players does not permute rewards')

    @property
    def num_players(self) -> int:
        return self.payoff.shape[-1]

    @property
    def num_actions(self) -> int:
        return len(self.actions)

    @property
    def reward_bound(self) -> float:
        """Maximum absolute payoff entry."""
        return float(np.abs(self.payoff).max())

    @cached_property
    def tree(self) -> HistoryTree:
        return HistoryTree(self.num_players, self.num_actions, self.horizon)

    def reward(self, joint_action: Sequence[int]) -> np.ndarray:
        return self.payoff[tuple(joint_action)]

    def action_index(self, label: str) -> int:
        try:
            return self.actions.index(label)
        except ValueError:
            raise KeyError(f'action {label!r} not in {self.actions}') from None

    def is_symmetric(self) -> bool:
        m = self.num_players
        for perm in itertools.permutations(range(m)):
            permuted = np.transpose(self.payoff, (*perm, m))[..., list(perm)]
            if not np.allclose(permuted, self.payoff, rtol=0, atol=1e-12):
                return False
        return True

    def to_dict(self) -> dict[str, Any]:
        return {
            'name': self.name,
            'players': self.num_players,
            'actions': list(self.actions),
            'payoffs': self.payoff.tolist(),
            'horizon': self.horizon,
            'symmetric': self.symmetric,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RepeatedGame:
        game = cls(actions=d['actions'],
                   payoff=d['payoffs'],
                   horizon=d['horizon'],
                   name=d.get('name', 'game'),
                   symmetric=bool(d.get('symmetric', False)))
        if 'players' in d and int(d['players']) != game.num_players:
            raise ValueError(f"'players' is {d['players']} but payoffs "
                             f'describe {game.num_players} players')
        return game


def prisoners_dilemma(horizon: int = 3) -> RepeatedGame:
    """The iterated Prisoner's Dilemma with payoffs 4/0/5/1."""
    return RepeatedGame(actions=('C', 'D'),
                        payoff=[[[4, 4], [0, 5]], [[5, 0], [1, 1]]],
                        horizon=horizon,
                        name='ipd',
                        symmetric=True)


class HistoryTree():
    """Index arithmetic over all joint-action histories of a game."""

    def __init__(self, num_players: int, num_actions: int, horizon: int):
        self.num_players = num_players
        self.num_actions = num_actions
        self.horizon = horizon
        self.num_joint = num_actions**num_players
        self.sizes = [self.num_joint**t for t in range(horizon + 1)]
        self.offsets = [0]
        for size in self.sizes[:-1]:
            self.offsets.append(self.offsets[-1] + size)
        self.joint_actions = np.array(
            list(itertools.product(range(num_actions), repeat=num_players)),
            dtype=np.int64)
        self.place = num_actions**np.arange(num_players - 1, -1, -1)
        # rotation[i, j]: index of joint action j seen from role i
        self.rotation = np.stack([
            self.joint_actions[:, np.roll(np.arange(num_players), -i)]
            @ self.place for i in range(num_players)
        ])
        # onehot[i, j, a] == (player i plays a in joint action j)
        self.onehot = (self.joint_actions.T[:, :, None] == np.arange(
            num_actions)[None, None, :]).astype(float)

    @property
    def num_nodes(self) -> int:
        """Number of decision nodes, i.e. histories of length < T."""
        return self.offsets[-1]

    @property
    def num_leaves(self) -> int:
        return self.sizes[-1]

    @property
    def enumerable(self) -> bool:
        return self.num_leaves <= MAX_LEAVES

    def check_enumerable(self):
        if not self.enumerable:
            raise EnumerationLimitError(
                f'exact enumeration needs {self.num_leaves} leaves '
                f'(limit {MAX_LEAVES}); past it only the stochastic solver '
                f'with the rollout estimator runs')

    @cached_property
    def views(self) -> list[np.ndarray]:
        """``views[t][i, local]``: global node id of the depth-t history
        ``local`` as seen from role i."""
        self.check_enumerable()
        m, J = self.num_players, self.num_joint
        local = np.zeros((m, 1), dtype=np.int64)
        ret = []
        for t in range(self.horizon):
            ret.append(local + self.offsets[t])
            local = (local[:, :, None] * J + self.rotation[:, None, :]).reshape(
                m, -1)
        return ret

    def joint_index(self, joint_action: Sequence[int]) -> int:
        return int(np.dot(joint_action, self.place))

    def validate(self, history: Sequence[Sequence[int]]) -> History:
        history = tuple(tuple(int(a) for a in step) for step in history)
        if len(history) >= self.horizon:
            raise UnknownHistoryError(
                f'history of length {len(history)} is not a decision point '
                f'of a {self.horizon}-round game')
        for step in history:
            if len(step) != self.num_players or not all(
                    0 <= a < self.num_actions for a in step):
                raise UnknownHistoryError(f'invalid joint action {step}')
        return history

    def node_id(self, history: Sequence[Sequence[int]]) -> int:
        history = self.validate(history)
        local = 0
        for step in history:
            local = local * self.num_joint + self.joint_index(step)
        return self.offsets[len(history)] + local

    def depth_of(self, node: int) -> int:
        if not 0 <= node < self.num_nodes:
            raise UnknownHistoryError(f'node {node} out of range')
        return int(np.searchsorted(self.offsets, node, side='right')) - 1

    def history_of(self, node: int) -> History:
        t = self.depth_of(node)
        local = node - self.offsets[t]
        steps = []
        for _ in range(t):
            local, j = divmod(local, self.num_joint)
            steps.append(tuple(int(a) for a in self.joint_actions[j]))
        return tuple(reversed(steps))

    def histories(self) -> Iterator[History]:
        """All decision histories in node order."""
        for node in range(self.num_nodes):
            yield self.history_of(node)

    def children(self, node: int) -> range:
        t = self.depth_of(node)
        if t + 1 >= self.horizon:
            return range(0)
        local = node - self.offsets[t]
        start = self.offsets[t + 1] + local * self.num_joint
        return range(start, start + self.num_joint)


def perspective(history: Sequence[Sequence[int]], role: int) -> History:
    """Rotate every joint action so that player ``role`` comes first."""
    ret = []
    for step in history:
        step = tuple(step)
        r = role % len(step)
        ret.append(step[r:] + step[:r])
    return tuple(ret)


def history_key(history: Sequence[Sequence[int]],
                actions: Sequence[str]) -> str:
    """``'CD|DD'`` style key; the empty history is ``''``."""
    return '|'.join(''.join(actions[a] for a in step) for step in history)


def parse_history_key(key: str, actions: Sequence[str],
                      num_players: int) -> History:
    if key == '':
        return ()
    token = re.compile('|'.join(
        re.escape(a) for a in sorted(actions, key=len, reverse=True)))
    ret = []
    for part in key.split('|'):
        pos, step = 0, []
        while pos < len(part):
            m = token.match(part, pos)
            if m is None:
                raise ValueError(f'cannot parse history key {key!r}')
            step.append(list(actions).index(m.group()))
            pos = m.end()
        if len(step) != num_players:
            raise ValueError(f'history key {key!r} has a step with '
                             f'{len(step)} actions, expected {num_players}')
        ret.append(tuple(step))
    return tuple(ret)


def per_capita_reward(game: RepeatedGame, joint_action: Sequence[int],
                      focal_indices: Iterable[int]) -> float:
    """Average reward of the focal players for one joint action."""
    focal = list(focal_indices)
    if not focal:
        raise ValueError('focal_indices must not be empty')
    if any(not 0 <= i < game.num_players for i in focal):
        raise ValueError(f'invalid focal indices {focal}')
    return float(np.mean(game.reward(joint_action)[focal]))


@dataclass(frozen=True)
class Scenario():
    """``focal_count`` copies of the focal policy in player slots
    ``0..c-1``; background policies fill slots ``c..m-1`` in order."""
    focal_count: int
    background: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'background', tuple(self.background))
        if self.focal_count < 1:
            raise ValueError('a scenario needs at least one focal player')

    @property
    def num_players(self) -> int:
        return self.focal_count + len(self.background)

    @property
    def is_universalisation(self) -> bool:
        return not self.background

    @property
    def id(self) -> str:
        return f'c{self.focal_count}:' + ','.join(self.background)

    @classmethod
    def from_id(cls, s: str) -> Scenario:
        head, _, tail = s.partition(':')
        if not head.startswith('c') or not head[1:].isdigit():
            raise ValueError(f'invalid scenario id {s!r}')
        return cls(int(head[1:]), tuple(tail.split(',')) if tail else ())

    def __str__(self):
        return self.id


@dataclass(frozen=True, eq=False)
class ScenarioSet():
    """An ordered, duplicate free list of scenarios of one game."""
    game: RepeatedGame
    scenarios: tuple[Scenario, ...]
    name: str = 'train'
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        scenarios = tuple(self.scenarios)
        object.__setattr__(self, 'scenarios', scenarios)
        index = {}
        for i, s in enumerate(scenarios):
            if s.num_players != self.game.num_players:
                raise ValueError(f'scenario {s} has {s.num_players} players, '
                                 f'game has {self.game.num_players}')
            if s in index:
                raise ValueError(f'duplicate scenario {s}')
            index[s] = i
        object.__setattr__(self, '_index', index)

    def __len__(self):
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    def __getitem__(self, i):
        return self.scenarios[i]

    def __contains__(self, s):
        return s in self._index

    def index(self, scenario: Scenario) -> int:
        return self._index[scenario]

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.scenarios]

    @property
    def universalisation_index(self) -> Optional[int]:
        return self._index.get(Scenario(self.game.num_players))

    @property
    def focal_counts(self) -> np.ndarray:
        return np.array([s.focal_count for s in self.scenarios])

    def background_names(self) -> list[str]:
        names = []
        for s in self.scenarios:
            for b in s.background:
                if b not in names:
                    names.append(b)
        return names


def build_scenario_set(game: RepeatedGame,
                       population: Iterable[str],
                       include_universalisation: bool = True,
                       focal_counts: Optional[Iterable[int]] = None,
                       name: str = 'train') -> ScenarioSet:
    """All scenarios ``(c, b)`` with ``c`` in ``focal_counts`` and ``b`` a
    vector of population identifiers, ordered by ``c`` then lexicographically
    by background identifiers."""
    names = sorted(population)
    if not names:
        raise ValueError('background population is empty')
    m = game.num_players
    if focal_counts is None:
        focal_counts = range(1, m + 1)
    focal_counts = sorted(set(int(c) for c in focal_counts))
    for c in focal_counts:
        if not 1 <= c <= m:
            raise ValueError(f'focal count {c} outside [1, {m}]')
    scenarios = []
    for c in focal_counts:
        if c == m:
            if include_universalisation:
                scenarios.append(Scenario(m))
            continue
        for background in itertools.product(names, repeat=m - c):
            scenarios.append(Scenario(c, background))
    log.debug('built scenario set %r with %d scenarios', name, len(scenarios))
    return ScenarioSet(game, tuple(scenarios), name)
