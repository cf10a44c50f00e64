"""Solver layer: SMT-LIB v2 prover client, verdicts and random fallback."""

from .client import (  # noqa: F401
    PROVED,
    ProverProcess,
    ReplayResult,
    SolverClient,
    SolverConfig,
    SolverPool,
    SolverTransportError,
    SolverVerdict,
    default_prover_command,
    replay_goal,
)
from .smtlib import ModelParseError, formula_to_script, parse_model  # noqa: F401
