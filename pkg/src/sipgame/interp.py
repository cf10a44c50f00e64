"""Concrete execution of SIP programs.

Values are native Python objects: bool, unbounded int, and
fractions.Fraction for exact rationals (always lowest terms, positive
denominator).  Boolean connectives are strict - both operands are evaluated -
so runtime division/modulo errors surface exactly where the VC generator
emits its guard obligations.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Union

from .lang import (
    Assert,
    Assign,
    Assume,
    Binary,
    Block,
    BoolLit,
    CAssign,
    Claim,
    Expr,
    If,
    IntLit,
    Ite,
    Print,
    Program,
    Stmt,
    Type,
    Unary,
    Var,
    VarDecl,
    While,
    expr_to_text,
)

Value = Union[bool, int, Fraction]

DEFAULT_ITERATION_CAP = 10_000
CASSIGN_ATTEMPTS = 1_000


class SipRuntimeError(Exception):
    pass


class EvalError(SipRuntimeError):
    pass


class DivisionByZeroError(EvalError):
    pass


class BadModulusError(EvalError):
    """Modulo by a non-positive value."""


class InfeasibleAssumeError(SipRuntimeError):
    def __init__(self, expr: Expr):
        super().__init__(f"assume failed: {expr_to_text(expr)}")
        self.expr = expr


class SipAssertionError(SipRuntimeError):
    def __init__(self, expr: Expr, values: dict[str, Value]):
        super().__init__(f"assertion failed: {expr_to_text(expr)}")
        self.expr = expr
        self.values = values


class CassignUnsatisfiableError(SipRuntimeError):
    def __init__(self, expr: Expr, proved: bool):
        how = "proved unsatisfiable" if proved else "search exhausted"
        super().__init__(f"cassign {how}: {expr_to_text(expr)}")
        self.expr = expr
        self.proved = proved


class IterationCapError(SipRuntimeError):
    def __init__(self, cap: int, partial_rows: list["State"]):
        super().__init__(f"loop exceeded {cap} iterations")
        self.cap = cap
        self.partial_rows = partial_rows


class PreconditionError(SipRuntimeError):
    pass


class InputError(SipRuntimeError):
    """Inputs missing, extraneous or not type-conforming."""


# --------------------------------------------------------------------------
# States and traces
# --------------------------------------------------------------------------

@dataclass
class State:
    """Variable valuation plus the program point it was sampled at."""

    values: dict[str, Value]
    location: Union[int, str]

    def copy_at(self, location: Union[int, str]) -> "State":
        return State(dict(self.values), location)


@dataclass
class Trace:
    """Loop-head snapshots of one run, plus the state after the loop."""

    inputs: dict[str, Value]
    rows: list[State]
    post: State
    printed: list[str] = field(default_factory=list)


def type_default(ty: Type) -> Value:
    if ty is Type.BOOLEAN:
        return False
    if ty is Type.RATIONAL:
        return Fraction(0)
    return 0


def conforms(value: Value, ty: Type) -> bool:
    if ty is Type.BOOLEAN:
        return isinstance(value, bool)
    if isinstance(value, bool):
        return False
    if ty is Type.NATURAL:
        return isinstance(value, int) and value >= 0
    if ty is Type.INTEGER:
        return isinstance(value, int)
    if ty is Type.RATIONAL:
        return isinstance(value, (int, Fraction))
    return False


def value_to_json(v: Value):
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return str(v)
    return f"{v.numerator}/{v.denominator}"


def value_from_json(raw, ty: Type) -> Value:
    """Parse a wire value ("46", "1/2", true) into a typed Value."""
    if ty is Type.BOOLEAN:
        if isinstance(raw, bool):
            return raw
        if isinstance(raw, str) and raw in ("true", "false"):
            return raw == "true"
        raise InputError(f"expected a boolean, got {raw!r}")
    if isinstance(raw, bool):
        raise InputError(f"expected a number, got {raw!r}")
    if isinstance(raw, int):
        value: Value = raw
    elif isinstance(raw, str):
        text = raw.strip()
        try:
            if "/" in text:
                num, den = text.split("/", 1)
                value = Fraction(int(num), int(den))
            else:
                value = int(text)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"cannot parse value {raw!r}")
    else:
        raise InputError(f"cannot parse value {raw!r}")
    if isinstance(value, Fraction) and value.denominator == 1:
        value = int(value)
    if not conforms(value, ty):
        raise InputError(f"value {raw!r} does not conform to {ty}")
    return value


# --------------------------------------------------------------------------
# Expression evaluation
# --------------------------------------------------------------------------

def eval_expr(e: Expr, values: Mapping[str, Value]) -> Value:
    """Exact evaluation; assumes the expression already type-checked."""
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Var):
        return values[e.name]
    if isinstance(e, Unary):
        v = eval_expr(e.operand, values)
        if e.op == "-":
            return -v
        return not v
    if isinstance(e, Ite):
        c = eval_expr(e.cond, values)
        return eval_expr(e.then if c else e.other, values)
    if isinstance(e, Binary):
        l = eval_expr(e.left, values)
        r = eval_expr(e.right, values)
        op = e.op
        if op == "+":
            return l + r
        if op == "-":
            return l - r
        if op == "*":
            return l * r
        if op == "/":
            if r == 0:
                raise DivisionByZeroError(expr_to_text(e))
            out = Fraction(l) / Fraction(r)
            return out
        if op == "%":
            if r <= 0:
                raise BadModulusError(expr_to_text(e))
            return l % r
        if op == "=":
            return l == r
        if op == "!=":
            return l != r
        if op == "<":
            return l < r
        if op == "<=":
            return l <= r
        if op == ">":
            return l > r
        if op == ">=":
            return l >= r
        if op == "&":
            return bool(l) and bool(r)
        if op == "|":
            return bool(l) or bool(r)
    raise EvalError(f"cannot evaluate {type(e).__name__}")


# --------------------------------------------------------------------------
# Sampling and cassign search
# --------------------------------------------------------------------------

def sample_value(ty: Type, rng: random.Random) -> Value:
    if ty is Type.BOOLEAN:
        return rng.random() < 0.5
    if ty is Type.NATURAL:
        return rng.randint(0, 100)
    if ty is Type.INTEGER:
        return rng.randint(-100, 100)
    num = rng.randint(-100, 100)
    den = rng.randint(1, 100)
    v = Fraction(num, den)
    return int(v) if v.denominator == 1 else v


# Optional escalation used when random sampling fails; wired in by the
# solver layer to avoid an import cycle.
CassignSolver = Callable[[tuple[str, ...], Expr, Mapping[str, Value]], Optional[dict[str, Value]]]


def solve_cassign(
    targets: tuple[str, ...],
    phi: Expr,
    values: Mapping[str, Value],
    type_env: Mapping[str, Type],
    rng: random.Random,
    attempts: int = CASSIGN_ATTEMPTS,
    solver: Optional[CassignSolver] = None,
) -> dict[str, Value]:
    """Find values for `targets` making `phi` true in `values`.

    Bounded random sampling first; if a solver callback is provided it is
    asked for a model afterwards, and may also prove unsatisfiability.
    """
    trial = dict(values)
    for _ in range(attempts):
        for name in targets:
            trial[name] = sample_value(type_env[name], rng)
        try:
            if eval_expr(phi, trial):
                return trial
        except EvalError:
            continue
    if solver is not None:
        model = solver(targets, phi, values)
        if model is not None:
            trial = dict(values)
            trial.update(model)
            if eval_expr(phi, trial):
                return trial
        else:
            raise CassignUnsatisfiableError(phi, proved=True)
    raise CassignUnsatisfiableError(phi, proved=False)


# --------------------------------------------------------------------------
# Statement execution
# --------------------------------------------------------------------------

# Hook invoked for each cassign: (static site index, targets, phi, values)
# -> updated values.  The default performs seeded random search.
CassignHook = Callable[[int, tuple[str, ...], Expr, dict[str, Value]], dict[str, Value]]


class StmtRunner:
    """Executes statement sequences against a mutable valuation."""

    def __init__(
        self,
        type_env: Mapping[str, Type],
        values: dict[str, Value],
        rng: Optional[random.Random] = None,
        cassign_hook: Optional[CassignHook] = None,
        cassign_solver: Optional[CassignSolver] = None,
    ):
        self.type_env = type_env
        self.values = values
        self.rng = rng or random.Random(0)
        self.printed: list[str] = []
        self._cassign_hook = cassign_hook
        self._cassign_solver = cassign_solver
        self._cassign_site = 0

    def run(self, stmts) -> None:
        for s in stmts:
            self.run_stmt(s)

    def run_stmt(self, s: Stmt) -> None:
        if isinstance(s, VarDecl):
            self.values[s.name] = type_default(s.type)
        elif isinstance(s, Assign):
            self.values[s.name] = eval_expr(s.expr, self.values)
        elif isinstance(s, Block):
            self.run(s.stmts)
        elif isinstance(s, If):
            # keep cassign site numbering aligned with symbolic execution,
            # which walks both branches
            if eval_expr(s.cond, self.values):
                self.run_stmt(s.then)
                self._cassign_site += count_cassign_sites(s.other)
            else:
                self._cassign_site += count_cassign_sites(s.then)
                self.run_stmt(s.other)
        elif isinstance(s, Print):
            parts = [_format_value(eval_expr(a, self.values)) for a in s.args]
            self.printed.append(" ".join(parts))
        elif isinstance(s, Assume):
            if not eval_expr(s.expr, self.values):
                raise InfeasibleAssumeError(s.expr)
        elif isinstance(s, (Assert, Claim)):
            if not eval_expr(s.expr, self.values):
                raise SipAssertionError(s.expr, dict(self.values))
        elif isinstance(s, CAssign):
            site = self._cassign_site
            self._cassign_site += 1
            if self._cassign_hook is not None:
                self.values.update(
                    self._cassign_hook(site, s.targets, s.expr, dict(self.values))
                )
            else:
                self.values.update(
                    solve_cassign(
                        s.targets, s.expr, self.values, self.type_env,
                        self.rng, solver=self._cassign_solver,
                    )
                )
        elif isinstance(s, While):
            raise SipRuntimeError("unexpected while statement in straight-line code")
        else:
            raise SipRuntimeError(f"cannot execute {type(s).__name__}")


def count_cassign_sites(s: Stmt) -> int:
    if isinstance(s, CAssign):
        return 1
    if isinstance(s, Block):
        return sum(count_cassign_sites(x) for x in s.stmts)
    if isinstance(s, If):
        return count_cassign_sites(s.then) + count_cassign_sites(s.other)
    if isinstance(s, While):
        return count_cassign_sites(s.body)
    return 0


def _format_value(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return str(v)


def initial_values(program: Program, inputs: Mapping[str, Value]) -> dict[str, Value]:
    """Defaults for every variable, then the given parameter values."""
    values = {name: type_default(ty) for name, ty in program.type_env.items()}
    values.update(inputs)
    return values


def check_inputs(program: Program, inputs: Mapping[str, Value]) -> None:
    param_names = set(program.param_names)
    given = set(inputs)
    if given != param_names:
        missing = param_names - given
        extra = given - param_names
        parts = []
        if missing:
            parts.append(f"missing inputs: {sorted(missing)}")
        if extra:
            parts.append(f"unexpected inputs: {sorted(extra)}")
        raise InputError("; ".join(parts))
    for name, ty in program.params:
        if not conforms(inputs[name], ty):
            raise InputError(f"input {name!r} does not conform to {ty}")


def exec_trace(
    program: Program,
    inputs: Mapping[str, Value],
    seed: int = 0,
    max_iterations: int = DEFAULT_ITERATION_CAP,
    cassign_solver: Optional[CassignSolver] = None,
) -> Trace:
    """Run a program, recording a state at every loop-head arrival.

    Raises InputError / PreconditionError for bad inputs, and the usual
    runtime errors (infeasible assume, assertion failure, iteration cap).
    """
    check_inputs(program, inputs)
    values = initial_values(program, inputs)
    if program.pre is not None and not eval_expr(program.pre, values):
        raise PreconditionError("inputs do not satisfy the precondition")

    runner = StmtRunner(
        program.type_env, values, random.Random(seed), cassign_solver=cassign_solver
    )
    runner.run(program.prelude)

    rows: list[State] = []
    iteration = 0
    while True:
        if iteration > max_iterations:
            raise IterationCapError(max_iterations, rows)
        rows.append(State(dict(values), iteration))
        if not eval_expr(program.test, values):
            break
        runner.run_stmt(program.body)
        iteration += 1

    runner.run(program.epilogue)
    post = State(dict(values), "post-loop")
    return Trace(dict(inputs), rows, post, runner.printed)


def trace_to_json(trace: Trace) -> dict:
    return {
        "inputs": {k: value_to_json(v) for k, v in trace.inputs.items()},
        "rows": [
            {
                "iteration": row.location,
                "values": {k: value_to_json(v) for k, v in row.values.items()},
            }
            for row in trace.rows
        ],
        "post": {k: value_to_json(v) for k, v in trace.post.values.items()},
        "printed": list(trace.printed),
    }
