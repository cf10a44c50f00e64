"""Type checking for SIP programs and player expressions.

Numeric types widen Natural -> Integer -> Rational.  Operator typing:

    + * ^     join of operand types (Natural stays Natural)
    -         Integer, or Rational if either side is Rational
    /         Rational always (exact division)
    %         Natural; both operands must be integer-typed, and a literal
              modulus must be positive
    cmp & |   Boolean

Assignment requires the right-hand type to widen into the declared type, so a
Natural variable can never be handed a possibly-negative value; game programs
use Integer locals and let players prove lower bounds instead.
"""

from __future__ import annotations

from typing import Mapping, Optional

from .nodes import (
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
)


class SipTypeError(Exception):
    """Carries the list of diagnostics produced by the checker."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


class UnknownVariableError(SipTypeError):
    def __init__(self, name: str):
        super().__init__([f"unknown variable {name!r}"])
        self.name = name


_WIDENING = {
    Type.NATURAL: {Type.NATURAL, Type.INTEGER, Type.RATIONAL},
    Type.INTEGER: {Type.INTEGER, Type.RATIONAL},
    Type.RATIONAL: {Type.RATIONAL},
    Type.BOOLEAN: {Type.BOOLEAN},
}


def assignable(source: Type, target: Type) -> bool:
    return target in _WIDENING[source]


def _join(a: Type, b: Type) -> Type:
    if Type.RATIONAL in (a, b):
        return Type.RATIONAL
    if Type.INTEGER in (a, b):
        return Type.INTEGER
    return Type.NATURAL


def type_of(e: Expr, env: Mapping[str, Type]) -> Type:
    """Static type of a well-formed expression; raises SipTypeError."""
    if isinstance(e, BoolLit):
        return Type.BOOLEAN
    if isinstance(e, IntLit):
        return Type.NATURAL if e.value >= 0 else Type.INTEGER
    if isinstance(e, Var):
        if e.name not in env:
            raise UnknownVariableError(e.name)
        return env[e.name]
    if isinstance(e, Unary):
        t = type_of(e.operand, env)
        if e.op == "-":
            if not t.is_numeric:
                raise SipTypeError(["unary '-' applied to a boolean"])
            return Type.RATIONAL if t is Type.RATIONAL else Type.INTEGER
        if e.op == "!":
            if t is not Type.BOOLEAN:
                raise SipTypeError(["'!' applied to a non-boolean"])
            return Type.BOOLEAN
    if isinstance(e, Ite):
        tc = type_of(e.cond, env)
        if tc is not Type.BOOLEAN:
            raise SipTypeError(["conditional guard must be boolean"])
        return _join(type_of(e.then, env), type_of(e.other, env))
    if isinstance(e, Binary):
        lt = type_of(e.left, env)
        rt = type_of(e.right, env)
        op = e.op
        if op in ("&", "|"):
            if lt is not Type.BOOLEAN or rt is not Type.BOOLEAN:
                raise SipTypeError([f"{op!r} requires boolean operands"])
            return Type.BOOLEAN
        if op in ("=", "!="):
            if (lt is Type.BOOLEAN) != (rt is Type.BOOLEAN):
                raise SipTypeError(["cannot compare a boolean with a number"])
            return Type.BOOLEAN
        if op in ("<", "<=", ">", ">="):
            if not lt.is_numeric or not rt.is_numeric:
                raise SipTypeError([f"{op!r} requires numeric operands"])
            return Type.BOOLEAN
        if not lt.is_numeric or not rt.is_numeric:
            raise SipTypeError([f"{op!r} requires numeric operands"])
        if op in ("+", "*"):
            return _join(lt, rt)
        if op == "-":
            return Type.RATIONAL if Type.RATIONAL in (lt, rt) else Type.INTEGER
        if op == "/":
            return Type.RATIONAL
        if op == "%":
            if Type.RATIONAL in (lt, rt):
                raise SipTypeError(["'%' requires integer-typed operands"])
            if isinstance(e.right, IntLit) and e.right.value <= 0:
                raise SipTypeError(["'%' modulus literal must be positive"])
            return Type.NATURAL
    raise SipTypeError([f"unsupported expression node {type(e).__name__}"])


class _Checker:
    def __init__(self, program: Program):
        self.program = program
        self.env: dict[str, Type] = {}
        self.declared: set[str] = set()
        self.errors: list[str] = []

    def check_expr(self, e: Expr, context: str, want_bool: bool = False) -> Optional[Type]:
        for node in _vars_in(e):
            if node not in self.env:
                self.errors.append(f"{context}: unknown variable {node!r}")
                return None
            if node not in self.declared:
                self.errors.append(f"{context}: use of {node!r} before declaration")
                return None
        try:
            t = type_of(e, self.env)
        except SipTypeError as exc:
            self.errors.extend(f"{context}: {d}" for d in exc.diagnostics)
            return None
        if want_bool and t is not Type.BOOLEAN:
            self.errors.append(f"{context}: expression must be boolean")
            return None
        return t

    def check_stmt(self, s: Stmt):
        if isinstance(s, VarDecl):
            if s.name in self.env:
                self.errors.append(f"variable {s.name!r} declared twice")
            else:
                self.env[s.name] = s.type
                self.declared.add(s.name)
        elif isinstance(s, Assign):
            if s.name not in self.env:
                self.errors.append(f"assignment to undeclared variable {s.name!r}")
                return
            if s.name not in self.declared:
                self.errors.append(f"assignment to {s.name!r} before declaration")
                return
            t = self.check_expr(s.expr, f"assignment to {s.name!r}")
            if t is not None and not assignable(t, self.env[s.name]):
                self.errors.append(
                    f"cannot assign {t} expression to {s.name!r}: {self.env[s.name]}"
                )
        elif isinstance(s, Block):
            for sub in s.stmts:
                self.check_stmt(sub)
        elif isinstance(s, If):
            self.check_expr(s.cond, "if condition", want_bool=True)
            self.check_stmt(s.then)
            self.check_stmt(s.other)
        elif isinstance(s, While):
            self.check_expr(s.test, "loop test", want_bool=True)
            if s.annotation is not None:
                self.check_expr(s.annotation, "loop annotation", want_bool=True)
            self.check_stmt(s.body)
        elif isinstance(s, Print):
            for a in s.args:
                self.check_expr(a, "print argument")
        elif isinstance(s, (Assume, Assert, Claim)):
            kind = type(s).__name__.lower()
            self.check_expr(s.expr, kind, want_bool=True)
        elif isinstance(s, CAssign):
            for name in s.targets:
                if name not in self.env:
                    self.errors.append(f"cassign target {name!r} is undeclared")
                elif name not in self.declared:
                    self.errors.append(f"cassign target {name!r} used before declaration")
            self.check_expr(s.expr, "cassign constraint", want_bool=True)

    def run(self) -> dict[str, Type]:
        p = self.program
        for name, ty in p.params:
            if name in self.env:
                self.errors.append(f"duplicate parameter {name!r}")
            self.env[name] = ty
            self.declared.add(name)
        if p.pre is not None:
            self.check_expr(p.pre, "pre", want_bool=True)
        for s in p.prelude:
            self.check_stmt(s)
        self.check_stmt(While(p.annotation, p.test, p.body))
        for s in p.epilogue:
            self.check_stmt(s)
        # post may mention any variable, including ones declared after the loop
        self.check_expr(p.post, "post", want_bool=True)
        if self.errors:
            raise SipTypeError(self.errors)
        return dict(self.env)


def _vars_in(e: Expr):
    from .nodes import walk_expr

    seen = []
    for node in walk_expr(e):
        if isinstance(node, Var):
            seen.append(node.name)
    return seen


def typecheck(program: Program) -> dict[str, Type]:
    """Check a parsed program; returns its type environment.

    Raises SipTypeError carrying every diagnostic found.
    """
    return _Checker(program).run()


def check_proposal(e: Expr, env: Mapping[str, Type]) -> Expr:
    """Validate a player expression against a level's type environment."""
    t = type_of(e, env)
    if t is not Type.BOOLEAN:
        raise SipTypeError(["top-level expression must be boolean"])
    return e
