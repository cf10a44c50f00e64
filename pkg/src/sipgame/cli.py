"""Command line driver.

  sipgame verify --program F --invariants F   batch-check an invariant list
  sipgame agent --url U --level L             template-enumeration player
  sipgame serve                               run the HTTP service
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
import sys
import time
from pathlib import Path

from . import interp
from .engine import InvariantEngine, InvariantState
from .lang import (
    SipSyntaxError,
    SipTypeError,
    Type,
    expr_to_text,
    parse_expr,
    parse_program,
)
from .solver import SolverClient, SolverConfig
from .vcgen import DEFAULT_UNROLL


def read_invariant_lines(path: Path) -> list[str]:
    """One expression per line; blank lines and # comments ignored."""
    out = []
    for line in path.read_text().splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            out.append(stripped)
    return out


def cmd_verify(args) -> int:
    try:
        program = parse_program(Path(args.program).read_text())
    except (OSError, SipSyntaxError, SipTypeError, Exception) as exc:
        print(f"error: cannot load program: {exc}", file=sys.stderr)
        return 2
    try:
        lines = read_invariant_lines(Path(args.invariants))
    except OSError as exc:
        print(f"error: cannot read invariants: {exc}", file=sys.stderr)
        return 2

    config = SolverConfig(timeout=args.timeout)
    report = {"program": args.program, "proposals": [], "solved": False}
    with SolverClient(config) as client:
        engine = InvariantEngine(program, client, unroll=args.unroll)
        state = InvariantState()
        for text in lines:
            try:
                expr = parse_expr(text, program.type_env)
            except (SipSyntaxError, SipTypeError) as exc:
                print(f"error: bad expression {text!r}: {exc}", file=sys.stderr)
                return 2
            if state.contains(expr):
                entry = {"expr": text, "kind": "duplicate"}
            else:
                kind, feedback, state = engine.propose_loop_inv(state, expr)
                entry = {"expr": text, "kind": kind.value}
                if feedback.promoted_invariants:
                    entry["promoted"] = [
                        expr_to_text(x) for x in feedback.promoted_invariants
                    ]
                if feedback.removed_invariants:
                    entry["removed"] = [
                        expr_to_text(x) for x in feedback.removed_invariants
                    ]
            report["proposals"].append(entry)
            if not args.json:
                extras = ""
                if entry.get("promoted"):
                    extras += f" promoted={entry['promoted']}"
                if entry.get("removed"):
                    extras += f" removed={entry['removed']}"
                print(f"{entry['kind']:14s} {text}{extras}")
        solved, _ = engine.check_solved(state)
        report["solved"] = solved
        report["inductive"] = [expr_to_text(e) for e in state.iinvs]
        report["potential"] = [expr_to_text(e) for e in state.pinvs]
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(f"inductive: {report['inductive']}")
        print(f"potential: {report['potential']}")
        print("solved" if solved else "not solved")
    return 0 if solved else 1


# --------------------------------------------------------------------------
# Agent
# --------------------------------------------------------------------------

TEMPLATE_FAMILIES = ("bounds", "pairs", "lines")


def enumerate_templates(variables: dict[str, Type],
                        families=TEMPLATE_FAMILIES, budget_constant: int = 4):
    """Candidate expressions by family: bounds (v <op> c), pairs (v <op> w)
    and lines (v = a*w + b).

    Ordered simplest-first; the caller filters against a trace before
    submitting anything.
    """
    numeric = [n for n, t in sorted(variables.items()) if t is not Type.BOOLEAN]
    comparisons = ["=", "<=", ">=", "<", ">"]
    seen = set()

    def emit(text):
        if text not in seen:
            seen.add(text)
            yield text

    if "bounds" in families:
        for v in numeric:
            for c in range(-budget_constant, budget_constant + 1):
                for op in comparisons:
                    yield from emit(f"{v} {op} {c}")
    if "pairs" in families:
        for v, w in itertools.permutations(numeric, 2):
            for op in comparisons:
                yield from emit(f"{v} {op} {w}")
    if "lines" in families:
        for v, w in itertools.permutations(numeric, 2):
            for a in range(-budget_constant, budget_constant + 1):
                if a == 0:
                    continue
                for b in range(-budget_constant, budget_constant + 1):
                    yield from emit(f"{v} = {a} * {w} + {b}")


def cmd_agent(args) -> int:
    import httpx

    base = args.url.rstrip("/")
    client = httpx.Client(base_url=base, timeout=60.0)

    def request(method, path, **kwargs):
        for attempt in range(4):
            try:
                response = client.request(method, path, **kwargs)
                if response.status_code != 429:
                    return response
            except httpx.TransportError:
                pass
            time.sleep(0.2 * (2 ** attempt))
        raise SystemExit("service unreachable")

    detail = request("GET", f"/api/levels/{args.level}")
    if detail.status_code == 404:
        print(f"error: unknown level {args.level!r}", file=sys.stderr)
        return 2
    level = detail.json()
    program = parse_program(level["source"])
    session = request("POST", "/api/sessions").json()["sessionId"]

    rng = random.Random(args.seed)
    trace_inputs = level.get("starterInputs") or {
        name: interp.value_to_json(interp.sample_value(program.type_env[name], rng))
        for name in level.get("parameters", [])
    }
    rows = []
    trace_response = request(
        "POST", f"/api/sessions/{session}/levels/{args.level}/trace",
        json={"inputs": trace_inputs},
    )
    if trace_response.status_code == 200:
        rows = [
            {
                name: interp.value_from_json(raw, program.type_env[name])
                for name, raw in row["values"].items()
            }
            for row in trace_response.json()["rows"]
        ]

    state = request("GET", f"/api/sessions/{session}/levels/{args.level}/state").json()
    solved = bool(state.get("solved"))
    submitted = []
    families = tuple(f for f in args.templates.split(",") if f) if args.templates is not None \
        else TEMPLATE_FAMILIES
    candidates = enumerate_templates(program.type_env, families) if not solved else []
    for text in candidates:
        if len(submitted) >= args.budget:
            break
        try:
            expr = parse_expr(text, program.type_env)
        except (SipSyntaxError, SipTypeError):
            continue
        # the local check: never submit anything the trace falsifies
        try:
            if not all(interp.eval_expr(expr, row) for row in rows):
                continue
        except interp.EvalError:
            continue
        response = request(
            "POST", f"/api/sessions/{session}/levels/{args.level}/propose",
            json={"expr": text},
        )
        if response.status_code == 409:
            continue
        if response.status_code != 200:
            continue
        body = response.json()
        submitted.append({"expr": text, "kind": body["kind"]})
        print(f"{body['kind']:14s} {text}")
        if body["solved"]:
            solved = True
            break
    print(f"proposals: {len(submitted)}, solved: {solved}")
    return 0 if solved else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig.from_env()
    if args.data_dir:
        config.data_dir = Path(args.data_dir)
    if args.ui_dir:
        config.ui_dir = Path(args.ui_dir)
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sipgame")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="check an invariant list against a program")
    verify.add_argument("--program", required=True)
    verify.add_argument("--invariants", required=True)
    verify.add_argument("--unroll", type=int, default=DEFAULT_UNROLL)
    verify.add_argument("--timeout", type=float, default=10.0)
    verify.add_argument("--json", action="store_true")
    verify.set_defaults(func=cmd_verify)

    agent = sub.add_parser("agent", help="play a level through the API")
    agent.add_argument("--url", required=True)
    agent.add_argument("--level", required=True)
    agent.add_argument("--budget", type=int, default=200)
    agent.add_argument("--seed", type=int, default=0)
    agent.add_argument("--templates", default=None,
                       help="comma-separated families: bounds,pairs,lines (default all)")
    agent.set_defaults(func=cmd_agent)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--data-dir", default=None)
    serve.add_argument("--ui-dir", default=None,
                       help="serve a built frontend from this directory")
    serve.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
