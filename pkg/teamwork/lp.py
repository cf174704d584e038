"""Linear programs over realization plans and priors.

With one focal player a scenario is a single-agent problem whose utility is
linear in the focal realization plan, so maximin utility and minimax regret
over a set of such scenarios are linear programs.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .exact import ResponseCache
from .game import ScenarioSet
from .policies.base import Policy
from .policies.tabular import StochasticPolicy
from .scenario import ScenarioBatch

log = logging.getLogger(__name__)


@dataclass
class GameValue():
    """Value of a policy-vs-prior game and an optimal pair."""
    value: float
    policy: StochasticPolicy
    prior: np.ndarray


def _plan_constraints(tree):
    """Equality constraints of realization plans over the decision nodes."""
    N, A, J = tree.num_nodes, tree.num_actions, tree.num_joint
    rows, cols, vals = [], [], []
    for a in range(A):
        rows.append(0)
        cols.append(a)
        vals.append(1.0)
    for t in range(1, tree.horizon):
        for local in range(tree.sizes[t]):
            node = tree.offsets[t] + local
            parent_local, j = divmod(local, J)
            parent = tree.offsets[t - 1] + parent_local
            a0 = int(tree.joint_actions[j, 0])
            for a in range(A):
                rows.append(node)
                cols.append(node * A + a)
                vals.append(1.0)
            rows.append(node)
            cols.append(parent * A + a0)
            vals.append(-1.0)
    A_eq = sp.csr_matrix((vals, (rows, cols)), shape=(N, N * A + 1))
    b_eq = np.zeros(N)
    b_eq[0] = 1.0
    return A_eq, b_eq


def _behavioural(plan: np.ndarray) -> np.ndarray:
    total = plan.sum(axis=1, keepdims=True)
    A = plan.shape[1]
    with np.errstate(divide='ignore', invalid='ignore'):
        probs = np.where(total > 1e-12, plan / total, 1 / A)
    probs = np.clip(probs, 0, None)
    return probs / probs.sum(axis=1, keepdims=True)


def _solve(scenario_set: ScenarioSet, policies: Mapping[str, Policy],
           offsets: Optional[np.ndarray], sign: float, name: str):
    batch = ScenarioBatch(scenario_set, policies)
    tree = batch.tree
    coef = batch.sequence_form().reshape(batch.size, -1)
    N, A = tree.num_nodes, tree.num_actions
    A_eq, b_eq = _plan_constraints(tree)
    # sign = +1: max v  s.t. v <= coef.x
    # sign = -1: min v  s.t. v >= best - coef.x
    c = np.zeros(N * A + 1)
    c[-1] = -sign
    A_ub = np.hstack([-coef, sign * np.ones((batch.size, 1))])
    b_ub = np.zeros(batch.size) if offsets is None else -offsets
    bounds = [(0, None)] * (N * A) + [(None, None)]
    res = linprog(c,
                  A_ub=A_ub,
                  b_ub=b_ub,
                  A_eq=A_eq,
                  b_eq=b_eq,
                  bounds=bounds,
                  method='highs')
    if not res.success:
        raise ValueError(f'linear program failed: {res.message}')
    plan = res.x[:-1].reshape(N, A)
    prior = np.abs(res.ineqlin.marginals)
    prior = prior / prior.sum() if prior.sum() > 0 else np.full(
        batch.size, 1 / batch.size)
    policy = StochasticPolicy(scenario_set.game, _behavioural(plan), name)
    log.debug('%s value %g over %d scenarios', name, res.x[-1], batch.size)
    return GameValue(float(res.x[-1]), policy, prior)


def maximin_utility(scenario_set: ScenarioSet,
                    policies: Mapping[str, Policy]) -> GameValue:
    """``max_pi min_s U(pi, s)`` over scenarios with one focal player."""
    return _solve(scenario_set, policies, None, 1.0, 'maximin_utility')


def minimax_regret(scenario_set: ScenarioSet,
                   policies: Mapping[str, Policy],
                   cache: Optional[ResponseCache] = None) -> GameValue:
    """``min_pi max_s R(pi, s)`` over scenarios with one focal player."""
    cache = cache or ResponseCache(policies)
    best, _ = cache.values(scenario_set)
    return _solve(scenario_set, policies, best, -1.0, 'minimax_regret')


def min_over_simplex(values: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimum of ``beta @ values`` over the probability simplex."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) == 0:
        raise ValueError('values must be a non-empty vector')
    n = len(values)
    res = linprog(values,
                  A_eq=np.ones((1, n)),
                  b_eq=[1.0],
                  bounds=[(0, None)] * n,
                  method='highs')
    if not res.success:
        raise ValueError(f'linear program failed: {res.message}')
    return float(res.fun), res.x
