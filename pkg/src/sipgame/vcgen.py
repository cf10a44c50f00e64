"""Goal construction and translation to quantifier-free formulas.

A Goal is a straight-line statement sequence ending in a single assert; the
four builders produce the initiation, bounded-invariance, consecution and
exit-check goals.  `symexec_to_vc` then runs forward symbolic execution over
a goal: assignments substitute terms, conditionals merge with Ite terms,
cassigns introduce fresh symbols, and division/modulo are lowered to fresh
symbols with definitional side constraints plus guard obligations, keeping
the symbolic semantics aligned with the interpreter's.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

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
    conjoin,
    negate,
    walk_stmt,
)

DEFAULT_UNROLL = 5

GATE_PREFIX = "_c"


class GoalContractError(Exception):
    pass


class GoalKind(enum.Enum):
    TAUTOLOGY = "tautology"
    DISPLACED = "displaced"
    DISPLACED_POT = "displaced-pot"
    UPTO_LOOP = "upto-loop"
    LOOP_UNROLLED = "loop-unrolled"
    CONSECUTION = "consecution"
    EXIT = "exit"
    RAW = "raw"


@dataclass
class Goal:
    """Statement sequence with exactly one assert, as the last element."""

    type_env: dict[str, Type]
    stmts: tuple[Stmt, ...]
    free_vars: frozenset[str]
    kind: GoalKind = GoalKind.RAW
    target: Optional[Expr] = None
    unroll: int = 0

    def __post_init__(self):
        if not self.stmts or not isinstance(self.stmts[-1], Assert):
            raise GoalContractError("goal must end with an assert statement")
        asserts = [s for s in self.stmts if isinstance(s, Assert)]
        if len(asserts) != 1:
            raise GoalContractError("goal must contain exactly one assert")
        for top in self.stmts:
            for s in walk_stmt(top):
                if isinstance(s, While):
                    raise GoalContractError("goals may not contain loops")
                if isinstance(s, Assert) and s is not self.stmts[-1]:
                    raise GoalContractError("only the final statement may assert")


def _demote_asserts(s: Stmt) -> Stmt:
    """Rewrite embedded asserts to claims (identical semantics)."""
    if isinstance(s, Assert):
        return Claim(s.expr)
    if isinstance(s, Block):
        return Block(tuple(_demote_asserts(x) for x in s.stmts))
    if isinstance(s, If):
        return If(s.cond, _demote_asserts(s.then), _demote_asserts(s.other))
    return s


def _goal_prefix(p: Program) -> list[Stmt]:
    """Pre-condition assumption plus the prelude minus declarations."""
    stmts: list[Stmt] = []
    if p.pre is not None:
        stmts.append(Assume(p.pre))
    for s in p.prelude:
        if isinstance(s, VarDecl):
            continue
        stmts.append(_demote_asserts(s))
    return stmts


def build_upto_loop(p: Program, e: Expr) -> Goal:
    """Initiation: does `e` hold the first time execution reaches the loop?"""
    stmts = _goal_prefix(p) + [Assert(e)]
    return Goal(
        type_env=dict(p.type_env),
        stmts=tuple(stmts),
        free_vars=frozenset(p.param_names),
        kind=GoalKind.UPTO_LOOP,
        target=e,
    )


def build_loop_unrolled(p: Program, e: Expr, k: int = DEFAULT_UNROLL) -> Goal:
    """Bounded invariance: `e` at the loop head within `k` iterations.

    Each unrolled iteration is gated by a fresh unconstrained boolean, so
    execution may nondeterministically stop early; a counterexample is a
    genuine input reaching a loop-head state that falsifies `e`.
    """
    if k < 1:
        raise ValueError("unroll bound must be at least 1")
    env = dict(p.type_env)
    stmts = _goal_prefix(p)
    body = _demote_asserts(p.body)
    for i in range(1, k + 1):
        gate = f"{GATE_PREFIX}{i}"
        if gate in env:
            raise GoalContractError(f"gate variable {gate!r} collides with a program variable")
        env[gate] = Type.BOOLEAN
        stmts.append(CAssign((gate,), BoolLit(True)))
        stmts.append(If(Binary("&", Var(gate), p.test), body, Block()))
    stmts.append(Assert(e))
    return Goal(
        type_env=env,
        stmts=tuple(stmts),
        free_vars=frozenset(p.param_names),
        kind=GoalKind.LOOP_UNROLLED,
        target=e,
        unroll=k,
    )


def build_consecution(p: Program, hyps: list[Expr], x: Expr) -> Goal:
    """One body execution under the hypotheses and the loop test preserves x."""
    stmts: list[Stmt] = [Assume(conjoin(list(hyps) + [p.test]))]
    stmts.append(_demote_asserts(p.body))
    stmts.append(Assert(x))
    return Goal(
        type_env=dict(p.type_env),
        stmts=tuple(stmts),
        free_vars=frozenset(p.type_env),
        kind=GoalKind.CONSECUTION,
        target=x,
    )


def build_exit_check(p: Program, assumed: list[Expr]) -> Goal:
    """From any state satisfying `assumed` and failing the test, the code
    after the loop establishes the guarantee."""
    stmts: list[Stmt] = [Assume(conjoin(list(assumed) + [negate(p.test)]))]
    for s in p.epilogue:
        if isinstance(s, VarDecl):
            continue
        stmts.append(_demote_asserts(s))
    stmts.append(Assert(p.post))
    return Goal(
        type_env=dict(p.type_env),
        stmts=tuple(stmts),
        free_vars=frozenset(p.type_env),
        kind=GoalKind.EXIT,
        target=p.post,
    )


def assertion_goal(p: Program, e: Expr, kind: GoalKind = GoalKind.TAUTOLOGY,
                   hyps: Optional[list[Expr]] = None) -> Goal:
    """Goal `assume(hyps); assert(e)` over unconstrained typed variables."""
    stmts: list[Stmt] = []
    if hyps:
        stmts.append(Assume(conjoin(hyps)))
    stmts.append(Assert(e))
    return Goal(
        type_env=dict(p.type_env),
        stmts=tuple(stmts),
        free_vars=frozenset(p.type_env),
        kind=kind,
        target=e,
    )


# --------------------------------------------------------------------------
# Symbolic execution
# --------------------------------------------------------------------------

@dataclass
class Formula:
    """Quantifier-free satisfiability query: sat iff the goal's assertion
    can be violated under the type assumptions."""

    sorts: dict[str, Type]
    path: tuple[Expr, ...]
    obligations: tuple[tuple[Optional[Expr], Expr], ...]  # (guard, must-hold)
    var_map: dict[str, tuple[str, int]]  # formula symbol -> (program var, cassign site)
    free_inputs: tuple[str, ...]


def _default_term(ty: Type) -> Expr:
    if ty is Type.BOOLEAN:
        return BoolLit(False)
    return IntLit(0)


def _guard_implies(guard: Optional[Expr], e: Expr) -> Expr:
    if guard is None:
        return e
    return Binary("|", negate(guard), e)


def _conj_guard(guard: Optional[Expr], extra: Expr) -> Expr:
    if guard is None:
        return extra
    return Binary("&", guard, extra)


class _SymExec:
    def __init__(self, goal: Goal):
        self.goal = goal
        self.sorts: dict[str, Type] = {}
        self.path: list[Expr] = []
        self.obligations: list[tuple[Optional[Expr], Expr]] = []
        self.var_map: dict[str, tuple[str, int]] = {}
        self.env: dict[str, Expr] = {}
        self.fresh_counter = 0
        self.cassign_site = 0
        for name, ty in goal.type_env.items():
            if name in goal.free_vars:
                self.env[name] = Var(name)
                self.sorts[name] = ty
                self.var_map[name] = (name, 0)
            else:
                self.env[name] = _default_term(ty)

    def fresh(self, base: str, ty: Type) -> Var:
        self.fresh_counter += 1
        name = f"{base}@{self.fresh_counter}"
        self.sorts[name] = ty
        return Var(name)

    # Substitute program variables by their current terms while lowering
    # division and modulo into fresh symbols with definitional constraints.
    def term(self, e: Expr, guard: Optional[Expr]) -> Expr:
        if isinstance(e, (BoolLit, IntLit)):
            return e
        if isinstance(e, Var):
            return self.env[e.name]
        if isinstance(e, Unary):
            return Unary(e.op, self.term(e.operand, guard))
        if isinstance(e, Ite):
            return Ite(
                self.term(e.cond, guard),
                self.term(e.then, guard),
                self.term(e.other, guard),
            )
        if isinstance(e, Binary):
            left = self.term(e.left, guard)
            right = self.term(e.right, guard)
            if e.op == "/":
                quot = self.fresh("div", Type.RATIONAL)
                if isinstance(right, IntLit) and right.value != 0:
                    ok: Optional[Expr] = None
                else:
                    ok = Binary("!=", right, IntLit(0))
                    self.obligations.append((guard, ok))
                g = guard if ok is None else _conj_guard(guard, ok)
                self.path.append(
                    _guard_implies(g, Binary("=", Binary("*", quot, right), left))
                )
                return quot
            if e.op == "%":
                q = self.fresh("quo", Type.INTEGER)
                r = self.fresh("rem", Type.INTEGER)
                if isinstance(right, IntLit) and right.value > 0:
                    ok: Optional[Expr] = None
                else:
                    ok = Binary(">", right, IntLit(0))
                    self.obligations.append((guard, ok))
                defining = conjoin([
                    Binary("=", left, Binary("+", Binary("*", right, q), r)),
                    Binary(">=", r, IntLit(0)),
                    Binary("<=", r, Binary("-", right, IntLit(1))),
                ])
                g = guard if ok is None else _conj_guard(guard, ok)
                self.path.append(_guard_implies(g, defining))
                return r
            return Binary(e.op, left, right)
        raise GoalContractError(f"cannot translate {type(e).__name__}")

    def run(self, stmts, guard: Optional[Expr]) -> None:
        for s in stmts:
            self.step(s, guard)

    def step(self, s: Stmt, guard: Optional[Expr]) -> None:
        if isinstance(s, VarDecl):
            self.env[s.name] = _default_term(s.type)
        elif isinstance(s, Assign):
            self.env[s.name] = self.term(s.expr, guard)
        elif isinstance(s, Block):
            self.run(s.stmts, guard)
        elif isinstance(s, If):
            cond = self.term(s.cond, guard)
            saved = dict(self.env)
            self.step(s.then, _conj_guard(guard, cond))
            then_env = self.env
            self.env = saved
            self.step(s.other, _conj_guard(guard, negate(cond)))
            else_env = self.env
            merged = {}
            for name in then_env:
                a, b = then_env[name], else_env[name]
                merged[name] = a if a == b else Ite(cond, a, b)
            self.env = merged
        elif isinstance(s, Print):
            for a in s.args:
                self.term(a, guard)
        elif isinstance(s, Assume):
            self.path.append(_guard_implies(guard, self.term(s.expr, guard)))
        elif isinstance(s, (Assert, Claim)):
            self.obligations.append((guard, self.term(s.expr, guard)))
        elif isinstance(s, CAssign):
            site = self.cassign_site
            self.cassign_site += 1
            for name in s.targets:
                ty = self.goal.type_env[name]
                sym = f"{name}@c{site}"
                self.sorts[sym] = ty
                self.var_map[sym] = (name, site)
                self.env[name] = Var(sym)
            self.path.append(_guard_implies(guard, self.term(s.expr, guard)))
        elif isinstance(s, While):
            raise GoalContractError("goals may not contain loops")
        else:
            raise GoalContractError(f"cannot execute {type(s).__name__}")


def symexec_to_vc(goal: Goal) -> Formula:
    """Forward symbolic execution of a goal into a Formula."""
    ex = _SymExec(goal)
    ex.run(goal.stmts, None)
    return Formula(
        sorts=ex.sorts,
        path=tuple(ex.path),
        obligations=tuple(ex.obligations),
        var_map=ex.var_map,
        free_inputs=tuple(sorted(goal.free_vars & set(goal.type_env))),
    )
