"""SIP language front end: syntax, abstract syntax and type checking."""

from __future__ import annotations

from dataclasses import replace
from typing import Mapping

from .nodes import (  # noqa: F401
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
    expr_vars,
    negate,
    walk_expr,
    walk_stmt,
)
from .parser import (  # noqa: F401
    ProgramStructureError,
    SipSyntaxError,
    parse_expression_text,
    parse_program_structure,
)
from .pretty import expr_to_text, program_to_text  # noqa: F401
from .typecheck import (  # noqa: F401
    SipTypeError,
    UnknownVariableError,
    assignable,
    check_proposal,
    type_of,
    typecheck,
)


def parse_program(source: str) -> Program:
    """Parse and type-check a SIP program.

    Raises SipSyntaxError, ProgramStructureError or SipTypeError.
    """
    program = parse_program_structure(source)
    env = typecheck(program)
    return replace(program, type_env=env)


def parse_expr(source: str, env: Mapping[str, Type]) -> Expr:
    """Parse a boolean expression over the given variables.

    This is the entry point for player proposals: the expression must use
    only declared variables and be boolean at the top level.
    """
    if not env:
        raise ValueError("expression environment must be non-empty")
    e = parse_expression_text(source)
    return check_proposal(e, env)
