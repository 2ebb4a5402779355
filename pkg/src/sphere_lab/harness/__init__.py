"""Experiment runners, report emission and the command-line interface."""

from .experiments import (
    CostGuardError,
    ExperimentReport,
    convergence_sweep,
    parse_m_rule,
    run_oracle_comparison,
    run_theorem1,
    run_theorem2,
)

__all__ = [
    "CostGuardError",
    "ExperimentReport",
    "convergence_sweep",
    "parse_m_rule",
    "run_oracle_comparison",
    "run_theorem1",
    "run_theorem2",
]
