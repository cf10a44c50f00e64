"""Level catalog: JSON level files parsed and validated at load time."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from ..interp import check_inputs, eval_expr, value_from_json
from ..lang import Program, parse_program
from ..vcgen import DEFAULT_UNROLL


class LevelError(Exception):
    pass


@dataclass
class Level:
    id: str
    title: str
    source: str
    program: Program
    starter_inputs: dict
    tutorial: bool = False
    unroll_bound: int = DEFAULT_UNROLL

    @classmethod
    def from_dict(cls, data: dict) -> "Level":
        try:
            program = parse_program(data["source"])
        except Exception as exc:
            raise LevelError(f"level {data.get('id')!r} does not load: {exc}")
        level = cls(
            id=data["id"],
            title=data.get("title", data["id"]),
            source=data["source"],
            program=program,
            starter_inputs=dict(data.get("starterInputs", {})),
            tutorial=bool(data.get("tutorial", False)),
            unroll_bound=int(data.get("unrollBound", DEFAULT_UNROLL)),
        )
        level.typed_starter_inputs()  # validates against the precondition
        return level

    def typed_starter_inputs(self) -> dict:
        params = dict(self.program.params)
        typed = {
            name: value_from_json(raw, params[name])
            for name, raw in self.starter_inputs.items()
        }
        check_inputs(self.program, typed)
        if self.program.pre is not None:
            values = dict(typed)
            if not eval_expr(self.program.pre, values):
                raise LevelError(f"level {self.id!r}: starter inputs fail the precondition")
        return typed


def load_levels(directory: Optional[Path] = None) -> dict[str, Level]:
    """Load the bundled catalog, or every *.json in a directory."""
    out: dict[str, Level] = {}
    if directory is not None:
        paths = sorted(Path(directory).glob("*.json"))
        raw_levels = [json.loads(p.read_text()) for p in paths]
    else:
        package = resources.files("sipgame.levels")
        raw_levels = [
            json.loads(entry.read_text())
            for entry in sorted(package.iterdir(), key=lambda e: e.name)
            if entry.name.endswith(".json")
        ]
    for data in raw_levels:
        level = Level.from_dict(data)
        if level.id in out:
            raise LevelError(f"duplicate level id {level.id!r}")
        out[level.id] = level
    return out
