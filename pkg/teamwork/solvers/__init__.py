from .background import train_background
from .baselines import (build_baseline_prior, fp_snapshot_iterations,
                        run_fictitious_play)
from .config import METHODS, SolverConfig
from .gda import SolverTrace, TraceRecord, run_gda
from .sgda import run_sgda
from .simplex import project_simplex
from .train import TrainResult, train
