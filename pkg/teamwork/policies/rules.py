"""Hand written IPD strategies.

Rules read the perspective history: ``step[0]`` is the player's own action
and ``step[watch]`` the action of the partner it reacts to.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..game import History
from .base import Policy

RULES = (
    'pure_cooperate',
    'pure_defect',
    'tit_for_tat',
    'tat_for_tit',
    'cooperate_until_defected',
    'defect_until_cooperated',
    'random',
)

_STARTED = {'tit_for_tat', 'tat_for_tit'}


class RulePolicy(Policy):
    """A named rule bound to a game's action labels.

    Args:
        rule: one of ``RULES``.
        actions: the game's action labels; every rule except ``random``
            needs ``'C'`` and ``'D'`` among them.
        start: first action of ``tit_for_tat`` and ``tat_for_tit``.
        watch: perspective slot of the partner the rule reacts to.
        name: identifier in a population.

    ``defect_until_cooperated`` defects first and then follows the partner's
    latest move, so it plays exactly like ``tit_for_tat`` starting with
    ``D``.  Reading it as absorbing (cooperate for good once cooperated
    with) would move the uniform random policy's canonical metrics off
    U_avg 7.4, U_min 1.5, R_max 5.5.

    Examples:
        >>> p = RulePolicy('tit_for_tat', ('C', 'D'), start='C')
        >>> p.act([(1, 1)], role_index=1)
        array([0., 1.])
    """

    def __init__(self,
                 rule: str,
                 actions: Sequence[str] = ('C', 'D'),
                 start: Optional[str] = None,
                 watch: int = 1,
                 name: Optional[str] = None):
        if rule not in RULES:
            raise ValueError(f'unknown rule {rule!r}, expected one of {RULES}')
        actions = tuple(actions)
        if rule != 'random' and not {'C', 'D'} <= set(actions):
            raise ValueError(
                f'rule {rule!r} needs actions C and D, got {actions}')
        if rule in _STARTED:
            start = 'C' if start is None else start
            if start not in ('C', 'D'):
                raise ValueError(f'start must be C or D, got {start!r}')
        elif start is not None:
            raise ValueError(f'rule {rule!r} takes no start action')
        if watch < 1:
            raise ValueError('watch must name another player (>= 1)')
        super().__init__(name or rule)
        self.rule = rule
        self.actions = actions
        self.start = start
        self.watch = int(watch)
        if rule != 'random':
            self._C = actions.index('C')
            self._D = actions.index('D')

    @property
    def params(self) -> dict:
        ret = {}
        if self.start is not None:
            ret['start'] = self.start
        if self.watch != 1:
            ret['watch'] = self.watch
        return ret

    def _onehot(self, a: int) -> np.ndarray:
        p = np.zeros(len(self.actions))
        p[a] = 1.0
        return p

    def _flip(self, a: int) -> int:
        return self._D if a == self._C else self._C

    def probs(self, view: History) -> np.ndarray:
        if self.rule == 'random':
            return np.full(len(self.actions), 1.0 / len(self.actions))
        if self.rule == 'pure_cooperate':
            return self._onehot(self._C)
        if self.rule == 'pure_defect':
            return self._onehot(self._D)

        seen = [step[self.watch % len(step)] for step in view]
        if self.rule == 'tit_for_tat':
            a = self.actions.index(self.start) if not seen else seen[-1]
        elif self.rule == 'tat_for_tit':
            a = (self.actions.index(self.start)
                 if not seen else self._flip(seen[-1]))
        elif self.rule == 'cooperate_until_defected':
            # absorbing
            a = self._D if self._D in seen else self._C
        else:
            # defect_until_cooperated reacts to the latest move only
            a = self._C if seen and seen[-1] == self._C else self._D
        if a not in (self._C, self._D):
            # a third action is read as defection
            a = self._D
        return self._onehot(a)
