import itertools

import numpy as np
import pytest

from teamwork.game import RepeatedGame, build_scenario_set, prisoners_dilemma
from teamwork.policies import canonical9


@pytest.fixture
def ipd():
    return prisoners_dilemma(3)


@pytest.fixture
def ipd2():
    return prisoners_dilemma(2)


@pytest.fixture
def canonical(ipd):
    return canonical9(ipd)


@pytest.fixture
def train_set(ipd, canonical):
    return build_scenario_set(ipd, canonical)


@pytest.fixture
def public_goods():
    """Three player, two round public goods game: C pays 1 into a pot that
    is doubled and shared."""
    payoff = np.zeros((2, 2, 2, 3))
    for a in itertools.product(range(2), repeat=3):
        pot = 2.0 * sum(1 for x in a if x == 0) / 3
        payoff[a] = [pot - (1 if x == 0 else 0) for x in a]
    return RepeatedGame(('C', 'D'), payoff, 2, 'pgg', symmetric=True)
