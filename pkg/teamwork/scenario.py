"""Scenario-induced decision problems.

``ScenarioBatch`` evaluates a focal policy on many scenarios at once.  For
every depth ``t`` it builds ``P_t[s, l, j]``, the probability that the
players of scenario ``s`` play joint action ``j`` after history ``l``; a
forward pass gives reach probabilities, a backward pass gives values.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .game import History, RepeatedGame, Scenario, ScenarioSet
from .policies.base import Policy

log = logging.getLogger(__name__)

FOCAL, COPY = 0, 1

# exhaustive shared-policy search is allowed up to this many policies
MAX_DETERMINISTIC = 2**22


def background_action_distribution(scenario: Scenario, policies: Mapping[
    str, Policy], history: Sequence[Sequence[int]]) -> dict[tuple, float]:
    """Distribution over the background players' joint action.

    Keys are tuples of actions for slots ``c..m-1``.
    """
    c, m = scenario.focal_count, scenario.num_players
    if c == m:
        raise ValueError('the universalisation scenario has no background '
                         'players')
    marginals = [
        policies[b].act(history, role_index=c + k)
        for k, b in enumerate(scenario.background)
    ]
    ret = {}
    for actions in itertools.product(*(range(len(p)) for p in marginals)):
        ret[actions] = float(
            np.prod([p[a] for p, a in zip(marginals, actions)]))
    return ret


@dataclass(frozen=True)
class Trajectory():
    history: History
    probability: float
    rewards: tuple[float, ...]

    @property
    def ret(self) -> float:
        return float(sum(self.rewards))


def enumerate_trajectories(game: RepeatedGame,
                           scenario: Scenario,
                           focal_policy: Policy,
                           policies: Mapping[str, Policy],
                           min_probability: float = 0.0) -> list[Trajectory]:
    """All complete histories with positive probability.

    Focal copies sample independently from ``focal_policy`` at their own
    seat; background players follow their policies at theirs.
    """
    game.tree.check_enumerable()
    c, m = scenario.focal_count, game.num_players
    if scenario.num_players != m:
        raise ValueError(f'scenario {scenario} does not fit {m} players')
    seats = [focal_policy] * c + [policies[b] for b in scenario.background]
    flat = game.payoff.reshape(-1, m)
    joint = game.tree.joint_actions
    rewards = flat[:, :c].mean(axis=1)

    ret = []

    def visit(history, prob, steps):
        if len(history) == game.horizon:
            ret.append(Trajectory(tuple(history), prob, tuple(steps)))
            return
        dists = [p.act(history, role_index=i) for i, p in enumerate(seats)]
        for j, a in enumerate(joint):
            q = prob * np.prod([d[k] for d, k in zip(dists, a)])
            if q <= min_probability:
                continue
            visit(history + [tuple(int(x) for x in a)], q,
                  steps + [float(rewards[j])])

    visit([], 1.0, [])
    return ret


class ScenarioBatch():
    """Vectorized exact evaluation of a focal policy on a scenario set.

    Args:
        scenario_set: scenarios to evaluate, in order.
        policies: background policies by identifier.
        rewards: per-step reward of the focal side for every joint action,
            shape ``(J,)`` or ``(S, J)``; defaults to the focal per-capita
            reward.
    """

    def __init__(self,
                 scenario_set: ScenarioSet,
                 policies: Mapping[str, Policy],
                 rewards: Optional[np.ndarray] = None):
        game = scenario_set.game
        tree = game.tree
        tree.check_enumerable()
        self.game = game
        self.tree = tree
        self.scenario_set = scenario_set
        names = scenario_set.background_names()
        self.background = names
        missing = [b for b in names if b not in policies]
        if missing:
            raise KeyError(f'background policies {missing} not in population')
        shape = (len(names), tree.num_nodes, tree.num_actions)
        self._tables = (np.stack([policies[b].table(game) for b in names])
                        if names else np.zeros(shape))
        S, m = len(scenario_set), game.num_players
        self.focal_counts = scenario_set.focal_counts
        self.focal_mask = np.arange(m)[None, :] < self.focal_counts[:, None]
        index = np.full((S, m), FOCAL)
        for s, scenario in enumerate(scenario_set):
            for k, b in enumerate(scenario.background):
                index[s, scenario.focal_count + k] = 2 + names.index(b)
        self._index = index
        self._index_delayed = index.copy()
        self._index_delayed[self.focal_mask & (np.arange(m)[None, :] > 0)] = COPY
        if rewards is None:
            flat = game.payoff.reshape(-1, m)
            rewards = np.stack(
                [flat[:, :c].mean(axis=1) for c in self.focal_counts])
        self.rewards = np.broadcast_to(
            np.asarray(rewards, dtype=float), (S, tree.num_joint))

    def __len__(self):
        return len(self.scenario_set)

    @property
    def size(self):
        return len(self.scenario_set)

    def _stack(self, focal: np.ndarray, copy: Optional[np.ndarray]):
        focal = np.asarray(focal, dtype=float)
        if focal.shape != self._tables.shape[1:]:
            raise ValueError(f'focal table shape {focal.shape} does not match '
                             f'{self._tables.shape[1:]}')
        copy = focal if copy is None else np.asarray(copy, dtype=float)
        return np.concatenate([focal[None], copy[None], self._tables])

    def _joint_probs(self, stack, index, t, slots=None):
        views = self.tree.views[t]
        joint = self.tree.joint_actions
        P = np.ones((len(index), views.shape[1], self.tree.num_joint))
        for k in (range(index.shape[1]) if slots is None else slots):
            rows = stack[index[:, k][:, None], views[k][None, :]]
            P *= rows[:, :, joint[:, k]]
        return P

    def _sweep(self, stack, index, weights=None, diff_mask=None):
        T, J = self.game.horizon, self.tree.num_joint
        S = len(index)
        Ps = [self._joint_probs(stack, index, t) for t in range(T)]
        reach = [np.ones((S, 1))]
        for t in range(T - 1):
            reach.append((reach[t][:, :, None] * Ps[t]).reshape(S, -1))
        W = None
        if weights is not None:
            W = np.zeros(stack.shape[1:])
        V = None
        for t in reversed(range(T)):
            n = Ps[t].shape[1]
            Q = np.broadcast_to(self.rewards[:, None, :], (S, n, J))
            if V is not None:
                Q = Q + V.reshape(S, n, J)
            PQ = Ps[t] * Q
            if W is not None:
                X = (weights[:, None, None] * reach[t][:, :, None]) * PQ
                views = self.tree.views[t]
                for i in range(index.shape[1]):
                    mask = diff_mask[:, i]
                    if not mask.any():
                        continue
                    Y = X[mask].sum(axis=0)
                    np.add.at(W, views[i], Y @ self.tree.onehot[i])
            V = PQ.sum(axis=-1)
        return V[:, 0], W

    def utilities(self,
                  focal: np.ndarray,
                  copy: Optional[np.ndarray] = None) -> np.ndarray:
        """Exact per-scenario utility of the focal table.

        With ``copy`` given, focal copies beyond the first play ``copy``.
        """
        index = self._index if copy is None else self._index_delayed
        U, _ = self._sweep(self._stack(focal, copy), index)
        return U

    def gradient(self,
                 focal: np.ndarray,
                 weights: np.ndarray,
                 copy: Optional[np.ndarray] = None):
        """Utilities and the gradient of ``sum_s weights[s] U_s`` with respect
        to the softmax parameters behind ``focal``.

        Without ``copy`` every focal copy is differentiated; with ``copy``
        only the first copy is and the others play the frozen table.

        Returns:
            (U, grad) with shapes ``(S,)`` and ``(num_nodes, num_actions)``.
        """
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (self.size, ):
            raise ValueError(f'weights shape {weights.shape} does not match '
                             f'{self.size} scenarios')
        if copy is None:
            index, diff = self._index, self.focal_mask
        else:
            index = self._index_delayed
            diff = np.zeros_like(self.focal_mask)
            diff[:, 0] = True
        focal = np.asarray(focal, dtype=float)
        U, W = self._sweep(self._stack(focal, copy), index, weights, diff)
        grad = W - focal * W.sum(axis=1, keepdims=True)
        return U, grad

    # responses

    def single_responses(self, sense: str = 'max', select=None):
        """Backward induction for scenarios with one focal player.

        Returns:
            (values, tables): optimal values ``(S',)`` and one-hot tables
            ``(S', num_nodes, num_actions)`` for the selected scenarios.
        """
        if select is None:
            select = np.flatnonzero(self.focal_counts == 1)
        select = np.asarray(select, dtype=int)
        if np.any(self.focal_counts[select] != 1):
            raise ValueError('single_responses needs scenarios with c = 1')
        pick = np.argmax if sense == 'max' else np.argmin
        tree, T = self.tree, self.game.horizon
        J, A = tree.num_joint, tree.num_actions
        S = len(select)
        index = self._index[select]
        stack = self._stack(np.zeros(self._tables.shape[1:]), None)
        rewards = self.rewards[select]
        slots = range(1, self.game.num_players)
        tables = np.zeros((S, tree.num_nodes, A))
        V = None
        for t in reversed(range(T)):
            Pbg = self._joint_probs(stack, index, t, slots)
            n = Pbg.shape[1]
            Q = np.broadcast_to(rewards[:, None, :], (S, n, J))
            if V is not None:
                Q = Q + V.reshape(S, n, J)
            X = (Pbg * Q).reshape(S, n, A, J // A).sum(axis=-1)
            best = pick(X, axis=-1)
            nodes = tree.offsets[t] + np.arange(n)
            tables[:, nodes, :] = np.eye(A)[best]
            V = np.take_along_axis(X, best[..., None], axis=-1)[..., 0]
        return V[:, 0], tables

    def sequence_form(self) -> np.ndarray:
        """Utility coefficients of the focal realization plan.

        For scenarios with one focal player, ``U_s = sum coef[s] * x`` where
        ``x[k, a]`` is the product of the focal policy's probabilities along
        history ``k`` times its probability of ``a`` at ``k``.
        """
        if np.any(self.focal_counts != 1):
            raise ValueError('sequence form needs scenarios with c = 1')
        tree, T = self.tree, self.game.horizon
        J, A, S = tree.num_joint, tree.num_actions, self.size
        stack = self._stack(np.zeros(self._tables.shape[1:]), None)
        slots = range(1, self.game.num_players)
        coef = np.zeros((S, tree.num_nodes, A))
        reach = np.ones((S, 1))
        for t in range(T):
            Pbg = self._joint_probs(stack, self._index, t, slots)
            n = Pbg.shape[1]
            X = reach[:, :, None] * Pbg
            coef[:, tree.offsets[t]:tree.offsets[t] + n] = (
                X * self.rewards[:, None, :]).reshape(S, n, A,
                                                      J // A).sum(axis=-1)
            reach = X.reshape(S, -1)
        return coef

    def shared_response(self, s: int, sense: str = 'max'):
        """Exhaustive search over deterministic policies shared by all focal
        copies of scenario ``s``.

        Only histories reached with positive probability are branched on, so
        the search visits far fewer than ``A**num_nodes`` policies.

        Returns:
            (value, actions): optimum and an action index per node (nodes
            never reached keep action 0).
        """
        tree, T = self.tree, self.game.horizon
        J, A, m = tree.num_joint, tree.num_actions, self.game.num_players
        c = int(self.focal_counts[s])
        index = self._index[s:s + 1]
        better = (lambda a, b: a > b) if sense == 'max' else (
            lambda a, b: a < b)
        rewards = self.rewards[s]
        joint = tree.joint_actions
        bg = [
            self._joint_probs(self._stack(np.zeros(self._tables.shape[1:]),
                                          None), index, t, range(c, m))[0]
            for t in range(T)
        ]

        def search(t, reach, assigned):
            if t == T:
                return 0.0, dict(assigned)
            views = tree.views[t]
            live = np.flatnonzero(reach > 0)
            nodes = sorted({int(views[i][l]) for l in live for i in range(c)}
                           - assigned.keys())
            best_value, best_assign = None, None
            for choice in itertools.product(range(A), repeat=len(nodes)):
                local = dict(assigned)
                local.update(zip(nodes, choice))
                P = bg[t].copy()
                for i in range(c):
                    acts = np.array([local.get(int(k), 0) for k in views[i]])
                    P *= (joint[None, :, i] == acts[:, None])
                P *= reach[:, None]
                value = float((P * rewards[None, :]).sum())
                tail, full = search(t + 1, P.reshape(-1), local)
                value += tail
                if best_value is None or better(value, best_value):
                    best_value, best_assign = value, full
            return best_value, best_assign

        value, assign = search(0, np.ones(1), {})
        log.debug('shared %s response for %s fixes %d nodes', sense,
                  self.scenario_set[s], len(assign))
        actions = np.zeros(tree.num_nodes, dtype=int)
        for k, a in assign.items():
            actions[k] = a
        return value, actions

    def shared_search_feasible(self) -> bool:
        tree = self.tree
        return tree.num_nodes * np.log2(tree.num_actions) <= np.log2(
            MAX_DETERMINISTIC)

    # sampling

    def rollouts(self,
                 s: int,
                 focal: np.ndarray,
                 rng: np.random.Generator,
                 num: int,
                 copy: Optional[np.ndarray] = None):
        """Sample ``num`` episodes of scenario ``s``.

        Returns:
            (returns, visits): per-episode focal per-capita return ``(num,)``
            and, per depth, ``(nodes, actions)`` arrays of shape
            ``(num, m)`` with the perspective node and action of every seat.
        """
        tree, T, m = self.tree, self.game.horizon, self.game.num_players
        index = (self._index if copy is None else self._index_delayed)[s]
        stack = self._stack(focal, copy)
        joint_of = tree.place
        local = np.zeros(num, dtype=np.int64)
        returns = np.zeros(num)
        visits = []
        for t in range(T):
            views = tree.views[t]
            nodes = np.stack([views[k][local] for k in range(m)], axis=1)
            probs = stack[index[None, :], nodes]
            cum = probs.cumsum(axis=-1)
            u = rng.random((num, m, 1))
            actions = np.minimum((u > cum).sum(axis=-1), tree.num_actions - 1)
            j = actions @ joint_of
            returns += self.rewards[s, j]
            visits.append((nodes, actions))
            local = local * tree.num_joint + j
        return returns, visits


class EpisodeSampler():
    """Rollouts of a scenario set whose history tree is too large to
    enumerate.

    Background players are asked one history at a time and the perspective
    node ids of the focal seats are advanced step by step, so no table over
    the whole tree is built except the focal one.  Draws match
    ``ScenarioBatch.rollouts`` for the same generator.
    """

    def __init__(self, scenario_set: ScenarioSet, policies: Mapping[str,
                                                                   Policy]):
        game = scenario_set.game
        self.game = game
        self.tree = game.tree
        self.scenario_set = scenario_set
        missing = [
            b for b in scenario_set.background_names() if b not in policies
        ]
        if missing:
            raise KeyError(f'background policies {missing} not in population')
        self.policies = policies
        self.focal_counts = scenario_set.focal_counts
        m = game.num_players
        flat = game.payoff.reshape(-1, m)
        self.rewards = np.stack(
            [flat[:, :c].mean(axis=1) for c in self.focal_counts])

    def __len__(self):
        return len(self.scenario_set)

    @property
    def size(self):
        return len(self.scenario_set)

    def rollouts(self,
                 s: int,
                 focal: np.ndarray,
                 rng: np.random.Generator,
                 num: int,
                 copy: Optional[np.ndarray] = None):
        """Same contract as ``ScenarioBatch.rollouts``."""
        tree, T, m = self.tree, self.game.horizon, self.game.num_players
        A, J = tree.num_actions, tree.num_joint
        scenario = self.scenario_set[s]
        c = scenario.focal_count
        tables = [focal] + [focal if copy is None else copy] * (c - 1)
        background = [self.policies[b] for b in scenario.background]
        roles = np.arange(m)[None, :]
        local = np.zeros((num, m), dtype=np.int64)
        histories = [[] for _ in range(num)]
        returns = np.zeros(num)
        visits = []
        for t in range(T):
            nodes = tree.offsets[t] + local
            probs = np.empty((num, m, A))
            for k in range(c):
                probs[:, k] = tables[k][nodes[:, k]]
            for k, p in enumerate(background):
                probs[:, c + k] = [
                    p.act(h, role_index=c + k) for h in histories
                ]
            cum = probs.cumsum(axis=-1)
            u = rng.random((num, m, 1))
            actions = np.minimum((u > cum).sum(axis=-1), A - 1)
            j = actions @ tree.place
            returns += self.rewards[s, j]
            visits.append((nodes, actions))
            local = local * J + tree.rotation[roles, j[:, None]]
            for h, a in zip(histories, actions):
                h.append(tuple(int(x) for x in a))
        return returns, visits


def sample_returns(game: RepeatedGame,
                   scenario: Scenario,
                   focal_policy: Policy,
                   policies: Mapping[str, Policy],
                   rng: np.random.Generator,
                   num: int = 1000) -> np.ndarray:
    """Monte Carlo focal per-capita returns of one scenario."""
    if num < 1:
        raise ValueError('num must be positive')
    single = ScenarioSet(game, (scenario, ), 'single')
    batch = (ScenarioBatch(single, policies)
             if game.tree.enumerable else EpisodeSampler(single, policies))
    returns, _ = batch.rollouts(0, focal_policy.table(game), rng, num)
    return returns
