"""Shared client/server evaluation fixture.

Generates (expression, trace-row) cases with the server's own evaluator and
freezes the expected outcome; the browser client's test suite replays the
same file.  Regenerate with `python -m tests.gen_color_fixture`.
"""

import json
from pathlib import Path

from sipgame import interp
from sipgame.lang import parse_expr
from sipgame.service.levels import load_levels

FIXTURE_PATH = Path(__file__).resolve().parent.parent / "frontend" / "fixtures" / "color_cases.json"

EXPRESSIONS = {
    "int-sqrt": [
        "odd % 2 = 1", "cnt >= 1", "cnt >= 0", "sqr = (cnt+1)^2",
        "sqr >= odd", "odd = cnt*2+1", "cnt^2 <= n", "sqr = cnt + 1",
        "odd * odd > sqr", "n - cnt >= 0", "sqr % 3 = 1", "odd / 2 >= 1",
        "10 / cnt >= 1", "odd % cnt = 1", "!(cnt > n) & odd >= 1",
        "cnt = 0 | sqr > 1",
    ],
    "gauss-sum": [
        "2*s = i*(i+1)", "i <= n", "s >= i", "s = 0", "s - i >= 0",
        "s % 2 = 0", "i = n", "2*s >= i^2",
    ],
    "half-steps": [
        "2*acc = k", "acc <= n", "acc = k / 2", "acc < 2", "k >= 0",
        "acc * 2 = k | k < 0",
    ],
    "warmup": ["x <= n", "x >= 1", "x = n", "n - x >= 0"],
}

TRACE_INPUTS = {
    "int-sqrt": [{"n": "46"}, {"n": "3"}, {"n": "0"}],
    "gauss-sum": [{"n": "6"}, {"n": "1"}],
    "half-steps": [{"n": "5"}, {"n": "0"}],
    "warmup": [{"n": "4"}],
}


def build_cases() -> list[dict]:
    cases = []
    levels = load_levels()
    for level_id, texts in EXPRESSIONS.items():
        level = levels[level_id]
        program = level.program
        rows = []
        for raw_inputs in TRACE_INPUTS[level_id]:
            typed = {
                name: interp.value_from_json(raw, dict(program.params)[name])
                for name, raw in raw_inputs.items()
            }
            trace = interp.exec_trace(program, typed)
            rows.extend(trace.rows)
        for text in texts:
            expr = parse_expr(text, program.type_env)
            for index, row in enumerate(rows):
                try:
                    outcome = "green" if interp.eval_expr(expr, row.values) else "red"
                except interp.EvalError:
                    outcome = "error"
                cases.append({
                    "level": level_id,
                    "expr": text,
                    "row": {k: interp.value_to_json(v) for k, v in row.values.items()},
                    "expected": outcome,
                })
    return cases


def main():
    cases = build_cases()
    FIXTURE_PATH.parent.mkdir(parents=True, exist_ok=True)
    FIXTURE_PATH.write_text(json.dumps(cases, indent=1) + "\n")
    print(f"wrote {len(cases)} cases to {FIXTURE_PATH}")


if __name__ == "__main__":
    main()
