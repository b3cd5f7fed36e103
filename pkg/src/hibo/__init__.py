"""Tree-guided trust-region Bayesian optimization with benchmarks and reporting."""

from .benchmarks import EmbeddedBenchmark, make_benchmark, perturb_effective_dims, regret
from .config import AlgorithmKind, RunConfig, load_config
from .core import HistoryDataset, Observation, SearchSpace, initial_sample
from .orchestrator import Optimizer, RunResult, run

__all__ = [
    "AlgorithmKind",
    "EmbeddedBenchmark",
    "HistoryDataset",
    "Observation",
    "Optimizer",
    "RunConfig",
    "RunResult",
    "SearchSpace",
    "initial_sample",
    "load_config",
    "make_benchmark",
    "perturb_effective_dims",
    "regret",
    "run",
]

__version__ = "0.1.0"
