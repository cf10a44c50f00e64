"""Render formulas to SMT-LIB v2 scripts and parse prover models.

Natural variables are declared Int with an asserted lower bound of zero;
Rational variables are Real.  Integer subterms feeding a Real context are
wrapped in to_real so scripts stay well-sorted for any conforming prover.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..lang import Binary, BoolLit, Expr, IntLit, Ite, Type, Unary, Var
from ..vcgen import Formula
from .minismt.sexpr import SExpr, is_numeral, parse_all, parse_numeral


class ModelParseError(Exception):
    pass


def smt_sort(ty: Type) -> str:
    if ty is Type.BOOLEAN:
        return "Bool"
    if ty is Type.RATIONAL:
        return "Real"
    return "Int"


_OP_NAMES = {"&": "and", "|": "or", "=": "=", "+": "+", "-": "-", "*": "*"}
_CMP = {"<", "<=", ">", ">="}


class _Renderer:
    def __init__(self, sorts: dict[str, Type]):
        self.sorts = {name: smt_sort(ty) for name, ty in sorts.items()}

    def sort_of(self, e: Expr) -> str:
        if isinstance(e, BoolLit):
            return "Bool"
        if isinstance(e, IntLit):
            return "Int"
        if isinstance(e, Var):
            return self.sorts[e.name]
        if isinstance(e, Unary):
            return "Bool" if e.op == "!" else self.sort_of(e.operand)
        if isinstance(e, Ite):
            a, b = self.sort_of(e.then), self.sort_of(e.other)
            return "Real" if "Real" in (a, b) else a
        if isinstance(e, Binary):
            if e.op in ("&", "|", "=", "!=") or e.op in _CMP:
                return "Bool"
            a, b = self.sort_of(e.left), self.sort_of(e.right)
            return "Real" if "Real" in (a, b) else a
        raise ValueError(f"cannot sort {type(e).__name__}")

    def emit(self, e: Expr, want: Optional[str] = None) -> str:
        text, sort = self._emit(e)
        if want == "Real" and sort == "Int":
            if isinstance(e, IntLit):
                v = e.value
                return f"(- {-v}.0)" if v < 0 else f"{v}.0"
            return f"(to_real {text})"
        return text

    def _emit(self, e: Expr) -> tuple[str, str]:
        if isinstance(e, BoolLit):
            return ("true" if e.value else "false"), "Bool"
        if isinstance(e, IntLit):
            v = e.value
            return (f"(- {-v})" if v < 0 else str(v)), "Int"
        if isinstance(e, Var):
            return e.name, self.sorts[e.name]
        if isinstance(e, Unary):
            inner, sort = self._emit(e.operand)
            if e.op == "!":
                return f"(not {inner})", "Bool"
            return f"(- {inner})", sort
        if isinstance(e, Ite):
            sort = self.sort_of(e)
            c = self.emit(e.cond)
            a = self.emit(e.then, want=sort if sort != "Bool" else None)
            b = self.emit(e.other, want=sort if sort != "Bool" else None)
            return f"(ite {c} {a} {b})", sort
        if isinstance(e, Binary):
            op = e.op
            if op in ("&", "|"):
                return f"({_OP_NAMES[op]} {self.emit(e.left)} {self.emit(e.right)})", "Bool"
            ls, rs = self.sort_of(e.left), self.sort_of(e.right)
            if op in ("=", "!=") and "Bool" in (ls, rs):
                body = f"(= {self.emit(e.left)} {self.emit(e.right)})"
                return (f"(not {body})" if op == "!=" else body), "Bool"
            want = "Real" if "Real" in (ls, rs) else None
            left = self.emit(e.left, want)
            right = self.emit(e.right, want)
            if op == "!=":
                return f"(not (= {left} {right}))", "Bool"
            if op in _CMP or op == "=":
                return f"({op} {left} {right})", "Bool"
            if op in ("+", "-", "*"):
                sort = "Real" if "Real" in (ls, rs) else "Int"
                return f"({op} {left} {right})", sort
            raise ValueError(f"operator {op!r} should have been lowered")
        raise ValueError(f"cannot render {type(e).__name__}")


def formula_to_script(formula: Formula, timeout_ms: Optional[int] = None,
                      seed: Optional[int] = None) -> str:
    """Full SMT-LIB script for one satisfiability query (without check-sat)."""
    r = _Renderer(formula.sorts)
    lines = []
    if timeout_ms is not None:
        lines.append(f"(set-option :timeout {timeout_ms})")
    if seed is not None:
        lines.append(f"(set-option :random-seed {seed})")
    for name in sorted(formula.sorts):
        lines.append(f"(declare-const {name} {r.sorts[name]})")
    for name in sorted(formula.sorts):
        if formula.sorts[name] is Type.NATURAL:
            lines.append(f"(assert (>= {name} 0))")
    for cond in formula.path:
        lines.append(f"(assert {r.emit(cond)})")
    obligations = []
    for guard, must in formula.obligations:
        if guard is None:
            obligations.append(r.emit(must))
        else:
            obligations.append(f"(or (not {r.emit(guard)}) {r.emit(must)})")
    if obligations:
        body = obligations[0] if len(obligations) == 1 else "(and " + " ".join(obligations) + ")"
        lines.append(f"(assert (not {body}))")
    else:
        lines.append("(assert false)")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Model readback
# --------------------------------------------------------------------------

def _parse_value(sx: SExpr):
    if isinstance(sx, str):
        if sx == "true":
            return True
        if sx == "false":
            return False
        if is_numeral(sx):
            return parse_numeral(sx)
        raise ModelParseError(f"unrecognized model value {sx!r}")
    if len(sx) == 2 and sx[0] == "-":
        inner = _parse_value(sx[1])
        if isinstance(inner, bool):
            raise ModelParseError("negated boolean in model")
        return -inner
    if len(sx) == 3 and sx[0] == "/":
        num, den = _parse_value(sx[1]), _parse_value(sx[2])
        return Fraction(num) / Fraction(den)
    raise ModelParseError(f"unrecognized model value {sx!r}")


def parse_model(text: str, sorts: dict[str, Type]):
    """Parse a (get-model) response into exact typed values.

    Raises ModelParseError on anything that cannot be read back exactly or
    does not conform to the declared types.
    """
    try:
        parsed = parse_all(text)
    except Exception as exc:
        raise ModelParseError(str(exc))
    if not parsed or not isinstance(parsed[0], list):
        raise ModelParseError("empty model response")
    entries = parsed[0]
    if entries and entries[0] == "model":
        entries = entries[1:]
    values = {}
    for entry in entries:
        if not isinstance(entry, list) or len(entry) < 5 or entry[0] != "define-fun":
            continue
        name = entry[1]
        if entry[2] != []:
            continue
        raw = _parse_value(entry[4])
        if name not in sorts:
            continue
        ty = sorts[name]
        if ty is Type.BOOLEAN:
            if not isinstance(raw, bool):
                raise ModelParseError(f"{name}: expected boolean")
            values[name] = raw
        else:
            if isinstance(raw, bool):
                raise ModelParseError(f"{name}: expected numeric")
            value = Fraction(raw)
            if ty in (Type.NATURAL, Type.INTEGER):
                if value.denominator != 1:
                    raise ModelParseError(f"{name}: expected integer, got {value}")
                if ty is Type.NATURAL and value < 0:
                    raise ModelParseError(f"{name}: negative Natural")
                values[name] = int(value)
            else:
                values[name] = int(value) if value.denominator == 1 else value
    return values
