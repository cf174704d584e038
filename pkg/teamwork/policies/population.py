from __future__ import annotations

from collections.abc import Mapping
from typing import Iterable, Iterator, Optional

from ..game import RepeatedGame
from .base import Policy
from .rules import RulePolicy

CANONICAL9 = (
    ('pure_cooperate', 'pure_cooperate', None),
    ('pure_defect', 'pure_defect', None),
    ('tit_for_tat_c', 'tit_for_tat', 'C'),
    ('tit_for_tat_d', 'tit_for_tat', 'D'),
    ('tat_for_tit_c', 'tat_for_tit', 'C'),
    ('tat_for_tit_d', 'tat_for_tit', 'D'),
    ('cooperate_until_defected', 'cooperate_until_defected', None),
    ('defect_until_cooperated', 'defect_until_cooperated', None),
    ('random', 'random', None),
)


class PolicySet(Mapping):
    """Named policies with optional sub-population labels."""

    def __init__(self,
                 policies: Iterable[Policy] = (),
                 labels: Optional[dict[str, str]] = None):
        self._policies: dict[str, Policy] = {}
        self.labels: dict[str, str] = {}
        for p in policies:
            self.add(p)
        for name, label in (labels or {}).items():
            if name not in self._policies:
                raise KeyError(f'label for unknown policy {name!r}')
            self.labels[name] = label

    def add(self, policy: Policy, label: Optional[str] = None):
        if not policy.name:
            raise ValueError('policies in a set need a name')
        if policy.name in self._policies:
            raise ValueError(f'duplicate policy identifier {policy.name!r}')
        self._policies[policy.name] = policy
        if label is not None:
            self.labels[policy.name] = label

    def __getitem__(self, name: str) -> Policy:
        try:
            return self._policies[name]
        except KeyError:
            raise KeyError(f'policy {name!r} not in population') from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._policies)

    def __len__(self) -> int:
        return len(self._policies)

    def merged(self, other: PolicySet) -> PolicySet:
        ret = PolicySet(self.values(), self.labels)
        for name, p in other.items():
            ret.add(p, other.labels.get(name))
        return ret

    def subpopulations(self) -> dict[str, list[str]]:
        ret = {}
        for name in self:
            ret.setdefault(self.labels.get(name, ''), []).append(name)
        return ret

    def __repr__(self):
        return f'PolicySet({list(self)})'


def canonical9(game: RepeatedGame) -> PolicySet:
    """The nine hand written IPD background policies."""
    if set(game.actions) != {'C', 'D'}:
        raise ValueError('the canonical population needs a game with '
                         f'actions C and D, got {game.actions}')
    return PolicySet(
        RulePolicy(rule, game.actions, start=start, name=name)
        for name, rule, start in CANONICAL9)
