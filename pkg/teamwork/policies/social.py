"""Social and risk preferences used to diversify background policies."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..game import RepeatedGame

LAMBDA_RANGE = (-0.2, 1.2)
DELTA_RANGE = (0.1, 2.0)


@dataclass(frozen=True)
class SocialPrefs():
    """Prosociality ``lam`` and risk aversion ``delta``."""
    lam: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and np.isfinite(self.delta)):
            raise ValueError(f'preferences must be finite, got {self}')

    def to_dict(self):
        return {'lambda': self.lam, 'delta': self.delta}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d['lambda']), float(d['delta']))


def transform(rewards: np.ndarray, player_index: int,
              prefs: SocialPrefs) -> np.ndarray:
    """Apply the preference transform to reward vectors along the last axis.

    ``lam * r_i + (1 - lam) * sum_j r_j`` is split into positive and
    negative parts and the negative part is scaled by ``delta``.
    """
    rewards = np.asarray(rewards, dtype=float)
    social = prefs.lam * rewards[..., player_index] + (
        1 - prefs.lam) * rewards.sum(axis=-1)
    return np.maximum(social, 0) - prefs.delta * np.maximum(-social, 0)


def social_risk_reward(game: RepeatedGame, joint_action: Sequence[int],
                       player_index: int, prefs: SocialPrefs) -> float:
    if not 0 <= player_index < game.num_players:
        raise ValueError(f'invalid player index {player_index}')
    return float(transform(game.reward(joint_action), player_index, prefs))


def social_payoff(game: RepeatedGame, player_index: int,
                  prefs: SocialPrefs) -> np.ndarray:
    """Transformed reward of one player for every joint action, in joint
    action index order."""
    flat = game.payoff.reshape(-1, game.num_players)
    return transform(flat, player_index, prefs)


def sample_prefs(rng: np.random.Generator,
                 lam_range: tuple[float, float] = LAMBDA_RANGE,
                 delta_range: tuple[float, float] = DELTA_RANGE) -> SocialPrefs:
    return SocialPrefs(float(rng.uniform(*lam_range)),
                       float(rng.uniform(*delta_range)))
