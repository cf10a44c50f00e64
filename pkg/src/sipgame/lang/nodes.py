"""AST node definitions for SIP programs.

A program is a single function with optional pre/post conditions and exactly
one while loop.  Expressions are shared between program text and player
proposals, so they are immutable and compare structurally.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional


class Type(enum.Enum):
    BOOLEAN = "Boolean"
    NATURAL = "Natural"
    INTEGER = "Integer"
    RATIONAL = "Rational"

    @property
    def is_numeric(self) -> bool:
        return self is not Type.BOOLEAN

    def __str__(self) -> str:
        return self.value


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------

class Expr:
    """Base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "-" | "!"
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    # "+" "-" "*" "/" "%" "=" "!=" "<" "<=" ">" ">=" "&" "|"
    # "^" never survives parsing: it is expanded into repeated "*".
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Ite(Expr):
    """Conditional term used internally by the VC generator.

    There is no surface syntax for this node; the parser never produces it.
    """

    cond: Expr
    then: Expr
    other: Expr


# --------------------------------------------------------------------------
# Statements
# --------------------------------------------------------------------------

class Stmt:
    __slots__ = ()


@dataclass(frozen=True)
class VarDecl(Stmt):
    name: str
    type: Type


@dataclass(frozen=True)
class Assign(Stmt):
    name: str
    expr: Expr


@dataclass(frozen=True)
class Block(Stmt):
    """Statement sequence; the empty block doubles as skip."""

    stmts: tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Block
    other: Block


@dataclass(frozen=True)
class While(Stmt):
    annotation: Optional[Expr]
    test: Expr
    body: Block


@dataclass(frozen=True)
class Print(Stmt):
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Assume(Stmt):
    expr: Expr


@dataclass(frozen=True)
class Assert(Stmt):
    expr: Expr


@dataclass(frozen=True)
class Claim(Stmt):
    """Treated exactly like Assert both dynamically and in VC generation."""

    expr: Expr


@dataclass(frozen=True)
class CAssign(Stmt):
    targets: tuple[str, ...]
    expr: Expr


# --------------------------------------------------------------------------
# Program
# --------------------------------------------------------------------------

@dataclass
class Program:
    """A parsed SIP function, split around its unique while loop."""

    name: str
    params: tuple[tuple[str, Type], ...]
    ret: Type
    pre: Optional[Expr]
    post: Expr
    prelude: tuple[Stmt, ...]
    test: Expr
    annotation: Optional[Expr]
    body: Block
    epilogue: tuple[Stmt, ...]
    type_env: dict[str, Type] = field(default_factory=dict)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.params)


def walk_expr(e: Expr):
    """Yield every node of an expression tree, preorder."""
    yield e
    if isinstance(e, Unary):
        yield from walk_expr(e.operand)
    elif isinstance(e, Binary):
        yield from walk_expr(e.left)
        yield from walk_expr(e.right)
    elif isinstance(e, Ite):
        yield from walk_expr(e.cond)
        yield from walk_expr(e.then)
        yield from walk_expr(e.other)


def walk_stmt(s: Stmt):
    """Yield every statement node, preorder."""
    yield s
    if isinstance(s, Block):
        for sub in s.stmts:
            yield from walk_stmt(sub)
    elif isinstance(s, If):
        yield from walk_stmt(s.then)
        yield from walk_stmt(s.other)
    elif isinstance(s, While):
        yield from walk_stmt(s.body)


def expr_vars(e: Expr) -> set[str]:
    return {n.name for n in walk_expr(e) if isinstance(n, Var)}


def conjoin(exprs) -> Expr:
    """Conjunction of a sequence of boolean expressions, `true` if empty."""
    exprs = list(exprs)
    if not exprs:
        return BoolLit(True)
    out = exprs[0]
    for e in exprs[1:]:
        out = Binary("&", out, e)
    return out


def negate(e: Expr) -> Expr:
    return Unary("!", e)
