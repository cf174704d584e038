from .errors import (DivergenceError, EnumerationLimitError, EpsilonNetError,
                     FormatError, InvalidDistributionError,
                     UnknownHistoryError)
from .evaluation import (MetricsRecord, audit_epsilon_bounds,
                         check_non_degenerative, check_saddle_point,
                         evaluate_metrics, generate_test_population,
                         sweep_epsilon, test_scenario_set)
from .exact import (EvalReport, Prior, ResponseCache, bayes_regret,
                    bayes_utility, best_response, best_response_value,
                    estimate_utility, evaluate_report, exact_policy_gradient,
                    exact_utility, min_response_value, regret, regrets,
                    utilities)
from .game import (RepeatedGame, Scenario, ScenarioSet, build_scenario_set,
                   per_capita_reward, prisoners_dilemma)
from .lp import maximin_utility, min_over_simplex, minimax_regret
from .policies import (PolicySet, RulePolicy, SocialPrefs, SoftmaxPolicy,
                       StochasticPolicy, canonical9)
from .scenario import (background_action_distribution, enumerate_trajectories,
                       sample_returns)
from .solvers import SolverConfig, train, train_background
from .version import __version__
