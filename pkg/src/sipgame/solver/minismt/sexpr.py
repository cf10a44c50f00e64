"""S-expression reading for the SMT-LIB v2 front end."""

from __future__ import annotations

from fractions import Fraction
from typing import Union

SExpr = Union[str, list]


class SExprError(Exception):
    pass


def tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            tokens.append(ch)
            i += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            if j >= n:
                raise SExprError("unterminated string literal")
            tokens.append(text[i:j + 1])
            i = j + 1
            continue
        if ch == "|":
            j = i + 1
            while j < n and text[j] != "|":
                j += 1
            if j >= n:
                raise SExprError("unterminated quoted symbol")
            tokens.append(text[i + 1:j])
            i = j + 1
            continue
        j = i
        while j < n and text[j] not in " \t\r\n();\"|":
            j += 1
        tokens.append(text[i:j])
        i = j
    return tokens


def parse_all(text: str) -> list[SExpr]:
    tokens = tokenize(text)
    out: list[SExpr] = []
    pos = 0

    def parse_one() -> SExpr:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while pos < len(tokens) and tokens[pos] != ")":
                items.append(parse_one())
            if pos >= len(tokens):
                raise SExprError("missing closing parenthesis")
            pos += 1
            return items
        if tok == ")":
            raise SExprError("unexpected closing parenthesis")
        return tok

    while pos < len(tokens):
        out.append(parse_one())
    return out


def balanced(text: str) -> bool:
    """True when every opened parenthesis in `text` is closed."""
    depth = 0
    in_string = False
    for ch in text:
        if in_string:
            if ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
    return depth <= 0


def parse_numeral(token: str) -> Fraction:
    """Integer or decimal numeral to an exact rational."""
    if "." in token:
        whole, frac = token.split(".", 1)
        scale = 10 ** len(frac)
        return Fraction(int(whole) * scale + int(frac or "0"), scale)
    return Fraction(int(token))


def is_numeral(token: str) -> bool:
    if not token:
        return False
    body = token
    if body[0] in "+-":
        body = body[1:]
    if not body:
        return False
    return all(c.isdigit() or c == "." for c in body) and body.count(".") <= 1


def render_value(value, sort: str) -> str:
    if sort == "Bool":
        return "true" if value else "false"
    if isinstance(value, Fraction) and value.denominator != 1:
        num, den = value.numerator, value.denominator
        if num < 0:
            return f"(- (/ {-num} {den}))"
        return f"(/ {num} {den})"
    n = int(value)
    if sort == "Real":
        return f"(- {-n}.0)" if n < 0 else f"{n}.0"
    return f"(- {-n})" if n < 0 else str(n)
