from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Optional

METHODS = ('MU', 'MR', 'PBR', 'SP', 'FP', 'RANDOM')
SELECTIONS = ('best_worst_case', 'last', 'uniform_random')


@dataclass(frozen=True)
class SolverConfig():
    """Settings of one training run.

    Attributes:
        method: MU (maximin utility), MR (minimax regret), or one of the
            baselines PBR, SP, FP, RANDOM.
        eta_theta: policy learning rate.
        eta_beta: prior learning rate.
        iterations: number of updates N.
        batch_size: scenarios sampled per iteration in stochastic mode.
        num_rollouts: episodes per sampled scenario in stochastic mode.
        delay_d: refresh interval of the frozen focal copy; defaults to the
            FP snapshot interval.
        exploration_floor: weight of the uniform prior mixed into the prior
            before sampling or weighting; defaults to 0 in exact mode and
            0.05 in stochastic mode.
        fp_snapshot_interval: FP snapshot cadence; defaults to
            ``max(1, iterations // 100)``.
        iterate_selection: which iterate to return.
        seed: root seed of every random stream of the run.
        mode: 'exact' (full information) or 'stochastic' (sampled).
        copy_mode: 'delayed' or 'joint' treatment of extra focal copies.
        baseline: subtract a per-scenario mean return in the rollout
            gradient.
        estimator: 'rollout' or 'exact' utility estimates in stochastic mode.
        theta_init_scale: standard deviation of the initial parameters.
    """
    method: str = 'MU'
    eta_theta: float = 0.5
    eta_beta: float = 0.1
    iterations: int = 20000
    batch_size: int = 16
    num_rollouts: int = 8
    delay_d: Optional[int] = None
    exploration_floor: Optional[float] = None
    fp_snapshot_interval: Optional[int] = None
    iterate_selection: str = 'best_worst_case'
    seed: int = 0
    mode: str = 'exact'
    copy_mode: str = 'delayed'
    baseline: bool = True
    estimator: str = 'rollout'
    theta_init_scale: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, 'method', str(self.method).upper())
        if self.method not in METHODS:
            raise ValueError(
                f'unknown method {self.method!r}, expected one of {METHODS}')
        if self.iterations < 1:
            raise ValueError('iterations must be at least 1')
        if self.method != 'RANDOM' and self.eta_theta <= 0:
            raise ValueError('eta_theta must be positive')
        if self.eta_beta < 0:
            raise ValueError('eta_beta must be non-negative')
        if self.batch_size < 1 or self.num_rollouts < 1:
            raise ValueError('batch_size and num_rollouts must be positive')
        if self.delay_d is not None and self.delay_d < 1:
            raise ValueError('delay_d must be positive')
        if self.exploration_floor is not None and not (
                0 <= self.exploration_floor < 1):
            raise ValueError('exploration_floor must lie in [0, 1)')
        if self.fp_snapshot_interval is not None and self.fp_snapshot_interval < 1:
            raise ValueError('fp_snapshot_interval must be positive')
        if self.iterate_selection not in SELECTIONS:
            raise ValueError(f'unknown iterate_selection '
                             f'{self.iterate_selection!r}')
        if self.mode not in ('exact', 'stochastic'):
            raise ValueError(f'unknown mode {self.mode!r}')
        if self.copy_mode not in ('delayed', 'joint'):
            raise ValueError(f'unknown copy_mode {self.copy_mode!r}')
        if self.estimator not in ('rollout', 'exact'):
            raise ValueError(f'unknown estimator {self.estimator!r}')
        if not 0 <= self.seed < 2**64:
            raise ValueError('seed must be a 64-bit unsigned integer')
        if self.theta_init_scale < 0:
            raise ValueError('theta_init_scale must be non-negative')

    @property
    def snapshot_interval(self) -> int:
        if self.fp_snapshot_interval is not None:
            return self.fp_snapshot_interval
        return max(1, self.iterations // 100)

    @property
    def delay(self) -> int:
        return self.snapshot_interval if self.delay_d is None else self.delay_d

    @property
    def floor(self) -> float:
        if self.exploration_floor is not None:
            return self.exploration_floor
        return 0.05 if self.mode == 'stochastic' else 0.0

    def replace(self, **kwds) -> SolverConfig:
        return replace(self, **kwds)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SolverConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f'unknown solver config keys {unknown}')
        return cls(**d)
