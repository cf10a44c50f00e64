"""Service configuration from environment variables."""

from __future__ import annotations

import os
import shlex
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..solver import SolverConfig, default_prover_command

ENV_PREFIX = "SIPGAME_"


@dataclass
class ServiceConfig:
    prover_command: tuple[str, ...] = field(default_factory=default_prover_command)
    solver_timeout: float = 10.0
    pool_size: int = 2
    data_dir: Path = field(default_factory=lambda: Path("./sipgame-data"))
    levels_dir: Optional[Path] = None
    ui_dir: Optional[Path] = None
    max_queue_waiters: int = 8

    @classmethod
    def from_env(cls, env: Optional[dict] = None) -> "ServiceConfig":
        env = dict(os.environ if env is None else env)
        cfg = cls()
        if env.get(ENV_PREFIX + "PROVER_CMD"):
            cfg.prover_command = tuple(shlex.split(env[ENV_PREFIX + "PROVER_CMD"]))
        if env.get(ENV_PREFIX + "SOLVER_TIMEOUT"):
            cfg.solver_timeout = float(env[ENV_PREFIX + "SOLVER_TIMEOUT"])
        if env.get(ENV_PREFIX + "POOL_SIZE"):
            cfg.pool_size = int(env[ENV_PREFIX + "POOL_SIZE"])
        if env.get(ENV_PREFIX + "DATA_DIR"):
            cfg.data_dir = Path(env[ENV_PREFIX + "DATA_DIR"])
        if env.get(ENV_PREFIX + "LEVELS_DIR"):
            cfg.levels_dir = Path(env[ENV_PREFIX + "LEVELS_DIR"])
        if env.get(ENV_PREFIX + "UI_DIR"):
            cfg.ui_dir = Path(env[ENV_PREFIX + "UI_DIR"])
        return cfg

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            command=self.prover_command,
            timeout=self.solver_timeout,
            pool_size=self.pool_size,
        )
