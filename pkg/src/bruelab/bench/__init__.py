from .config import ExperimentConfig, SandboxSpec, build_config, load_toml
from .runner import (BenchmarkRecord, SummaryRow, action_matrix, error_matrix, run_bench,
                     run_gametree_bench, run_sailing_bench, run_sandbox, summarize)

__all__ = [
    "ExperimentConfig", "SandboxSpec", "build_config", "load_toml",
    "BenchmarkRecord", "SummaryRow", "action_matrix", "error_matrix", "run_bench",
    "run_gametree_bench", "run_sailing_bench", "run_sandbox", "summarize",
]
