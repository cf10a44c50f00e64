"""Render AST nodes back to SIP concrete syntax."""

from __future__ import annotations

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
    Unary,
    Var,
    VarDecl,
    While,
)

# binding strength; comparisons are non-associative so both sides get bumped
_PREC = {
    "|": 1, "&": 2,
    "=": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5, "%": 5,
}
_UNARY_PREC = 6


def expr_to_text(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        inner = expr_to_text(e.operand, _UNARY_PREC)
        text = f"{e.op}{inner}"
        return f"({text})" if parent_prec > _UNARY_PREC else text
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        left = expr_to_text(e.left, prec)
        # right side bumped: left-associative chains print without parens,
        # and comparisons never chain
        right = expr_to_text(e.right, prec + 1)
        text = f"{left} {e.op} {right}"
        return f"({text})" if parent_prec > prec else text
    if isinstance(e, Ite):
        raise ValueError("internal conditional terms have no concrete syntax")
    raise ValueError(f"cannot print {type(e).__name__}")


def _stmt_lines(s: Stmt, indent: str) -> list[str]:
    if isinstance(s, VarDecl):
        return [f"{indent}var {s.name}: {s.type};"]
    if isinstance(s, Assign):
        return [f"{indent}{s.name} := {expr_to_text(s.expr)};"]
    if isinstance(s, Block):
        out = []
        for sub in s.stmts:
            out.extend(_stmt_lines(sub, indent))
        return out
    if isinstance(s, If):
        out = [f"{indent}if ({expr_to_text(s.cond)}) {{"]
        out.extend(_stmt_lines(s.then, indent + "  "))
        out.append(f"{indent}}} else {{")
        out.extend(_stmt_lines(s.other, indent + "  "))
        out.append(f"{indent}}}")
        return out
    if isinstance(s, While):
        ann = f"[{expr_to_text(s.annotation)}] " if s.annotation is not None else ""
        out = [f"{indent}while {ann}({expr_to_text(s.test)}) {{"]
        out.extend(_stmt_lines(s.body, indent + "  "))
        out.append(f"{indent}}}")
        return out
    if isinstance(s, Print):
        args = ", ".join(expr_to_text(a) for a in s.args)
        return [f"{indent}print({args});"]
    if isinstance(s, Assume):
        return [f"{indent}assume({expr_to_text(s.expr)});"]
    if isinstance(s, Assert):
        return [f"{indent}assert({expr_to_text(s.expr)});"]
    if isinstance(s, Claim):
        return [f"{indent}claim({expr_to_text(s.expr)});"]
    if isinstance(s, CAssign):
        names = ", ".join(s.targets)
        return [f"{indent}cassign([{names}], {expr_to_text(s.expr)});"]
    raise ValueError(f"cannot print {type(s).__name__}")


def program_to_text(p: Program) -> str:
    params = ", ".join(f"{n}: {t}" for n, t in p.params)
    lines = [f"fn {p.name}({params}): {p.ret} {{"]
    if p.pre is not None:
        lines.append(f"  pre({expr_to_text(p.pre)});")
    lines.append(f"  post({expr_to_text(p.post)});")
    for s in p.prelude:
        lines.extend(_stmt_lines(s, "  "))
    lines.extend(_stmt_lines(While(p.annotation, p.test, p.body), "  "))
    for s in p.epilogue:
        lines.extend(_stmt_lines(s, "  "))
    lines.append("}")
    return "\n".join(lines) + "\n"
