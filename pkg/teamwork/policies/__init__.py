from .base import Policy, check_distribution
from .distance import policy_distance, sample_epsilon_ball, scenario_distance
from .population import CANONICAL9, PolicySet, canonical9
from .rules import RULES, RulePolicy
from .social import (SocialPrefs, sample_prefs, social_payoff,
                     social_risk_reward)
from .tabular import (SoftmaxPolicy, StochasticPolicy, TabularPolicy,
                      constant_policy, deterministic_policy, snapshot)
