"""Recursive-descent parser for the SIP concrete syntax.

Grammar sketch (loosest to tightest expression precedence):

    program := "fn" ident "(" params ")" ":" type "{"
                   ["pre" "(" expr ")" ";"] ["post" "(" expr ")" ";"] stmt* "}"
    stmt    := "var" ident ":" type ";"
             | ident ":=" expr ";"
             | "if" "(" expr ")" block "else" block
             | "while" ["[" expr "]"] "(" expr ")" block
             | "print" "(" expr {"," expr} ")" ";"
             | "assume" "(" expr ")" ";" | "assert" "(" expr ")" ";"
             | "claim" "(" expr ")" ";"
             | "cassign" "(" "[" ident {"," ident} "]" "," expr ")" ";"
    expr    := "|" < "&" < comparisons (non-associative) < "+ -" < "* / %"
               < "^" < unary "- !" < atoms

`^` requires a non-negative integer literal exponent and is expanded into
repeated multiplication here, so no later stage ever sees it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

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
    Print,
    Program,
    Stmt,
    Type,
    Unary,
    Var,
    VarDecl,
    While,
    walk_stmt,
)


class SipSyntaxError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ProgramStructureError(Exception):
    """Raised for well-formed syntax that violates program shape rules."""


KEYWORDS = {
    "fn", "var", "if", "else", "while", "print", "assume", "assert",
    "claim", "cassign", "pre", "post", "true", "false",
    "Boolean", "Natural", "Integer", "Rational",
}

_PUNCT = [
    ":=", "!=", "<=", ">=",
    "(", ")", "{", "}", "[", "]", ";", ":", ",",
    "+", "-", "*", "/", "%", "^", "=", "<", ">", "&", "|", "!",
]


@dataclass
class Token:
    kind: str  # "ident" | "int" | "kw" | punctuation text | "eof"
    text: str
    line: int
    column: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("int", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if source.startswith(p, i):
                tokens.append(Token(p, p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise SipSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


_COMPARISONS = ("=", "!=", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise SipSyntaxError(message, tok.line, tok.column)

    def expect(self, kind: str, what: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            self.error(f"expected {what or kind!r}, found {tok.text or 'end of input'!r}")
        return self.next()

    def expect_kw(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind != "kw" or tok.text != word:
            self.error(f"expected {word!r}, found {tok.text or 'end of input'!r}")
        return self.next()

    def at_kw(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "kw" and tok.text == word

    # -- expressions --------------------------------------------------------

    def parse_expr(self) -> Expr:
        return self._or()

    def _or(self) -> Expr:
        e = self._and()
        while self.peek().kind == "|":
            self.next()
            e = Binary("|", e, self._and())
        return e

    def _and(self) -> Expr:
        e = self._cmp()
        while self.peek().kind == "&":
            self.next()
            e = Binary("&", e, self._cmp())
        return e

    def _cmp(self) -> Expr:
        e = self._add()
        if self.peek().kind in _COMPARISONS:
            op = self.next().kind
            right = self._add()
            if self.peek().kind in _COMPARISONS:
                self.error("comparisons are non-associative; parenthesize")
            return Binary(op, e, right)
        return e

    def _add(self) -> Expr:
        e = self._mul()
        while self.peek().kind in ("+", "-"):
            op = self.next().kind
            e = Binary(op, e, self._mul())
        return e

    def _mul(self) -> Expr:
        e = self._pow()
        while self.peek().kind in ("*", "/", "%"):
            op = self.next().kind
            e = Binary(op, e, self._pow())
        return e

    def _pow(self) -> Expr:
        e = self._unary()
        if self.peek().kind == "^":
            tok = self.next()
            exp = self.peek()
            if exp.kind != "int":
                self.error("exponent must be a non-negative integer literal", tok)
            self.next()
            return _expand_power(e, int(exp.text))
        return e

    def _unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "-":
            self.next()
            return Unary("-", self._unary())
        if tok.kind == "!":
            self.next()
            return Unary("!", self._unary())
        return self._atom()

    def _atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return IntLit(int(tok.text))
        if tok.kind == "kw" and tok.text in ("true", "false"):
            self.next()
            return BoolLit(tok.text == "true")
        if tok.kind == "ident":
            self.next()
            return Var(tok.text)
        if tok.kind == "(":
            self.next()
            e = self.parse_expr()
            self.expect(")")
            return e
        self.error(f"expected expression, found {tok.text or 'end of input'!r}")

    # -- statements ---------------------------------------------------------

    def parse_type(self) -> Type:
        tok = self.peek()
        if tok.kind == "kw" and tok.text in ("Boolean", "Natural", "Integer", "Rational"):
            self.next()
            return Type(tok.text)
        self.error(f"expected type, found {tok.text!r}")

    def parse_block(self) -> Block:
        self.expect("{")
        stmts = []
        while self.peek().kind != "}":
            stmts.append(self.parse_stmt())
        self.expect("}")
        return Block(tuple(stmts))

    def parse_stmt(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "kw":
            if tok.text == "var":
                self.next()
                name = self.expect("ident").text
                self.expect(":")
                ty = self.parse_type()
                self.expect(";")
                return VarDecl(name, ty)
            if tok.text == "if":
                self.next()
                self.expect("(")
                cond = self.parse_expr()
                self.expect(")")
                then = self.parse_block()
                self.expect_kw("else")
                other = self.parse_block()
                return If(cond, then, other)
            if tok.text == "while":
                self.next()
                annotation = None
                if self.peek().kind == "[":
                    self.next()
                    annotation = self.parse_expr()
                    self.expect("]")
                self.expect("(")
                test = self.parse_expr()
                self.expect(")")
                body = self.parse_block()
                return While(annotation, test, body)
            if tok.text == "print":
                self.next()
                self.expect("(")
                args = [self.parse_expr()]
                while self.peek().kind == ",":
                    self.next()
                    args.append(self.parse_expr())
                self.expect(")")
                self.expect(";")
                return Print(tuple(args))
            if tok.text in ("assume", "assert", "claim"):
                self.next()
                self.expect("(")
                e = self.parse_expr()
                self.expect(")")
                self.expect(";")
                cls = {"assume": Assume, "assert": Assert, "claim": Claim}[tok.text]
                return cls(e)
            if tok.text == "cassign":
                self.next()
                self.expect("(")
                self.expect("[")
                names = [self.expect("ident").text]
                while self.peek().kind == ",":
                    self.next()
                    names.append(self.expect("ident").text)
                self.expect("]")
                self.expect(",")
                e = self.parse_expr()
                self.expect(")")
                self.expect(";")
                return CAssign(tuple(names), e)
        if tok.kind == "ident":
            name = self.next().text
            self.expect(":=", "':='")
            e = self.parse_expr()
            self.expect(";")
            return Assign(name, e)
        self.error(f"expected statement, found {tok.text or 'end of input'!r}")

    # -- program ------------------------------------------------------------

    def parse_function(self):
        self.expect_kw("fn")
        name = self.expect("ident").text
        self.expect("(")
        params: list[tuple[str, Type]] = []
        if self.peek().kind != ")":
            while True:
                pname = self.expect("ident").text
                self.expect(":")
                params.append((pname, self.parse_type()))
                if self.peek().kind != ",":
                    break
                self.next()
        self.expect(")")
        self.expect(":")
        ret = self.parse_type()
        self.expect("{")
        pre = post = None
        if self.at_kw("pre"):
            self.next()
            self.expect("(")
            pre = self.parse_expr()
            self.expect(")")
            self.expect(";")
        if self.at_kw("post"):
            self.next()
            self.expect("(")
            post = self.parse_expr()
            self.expect(")")
            self.expect(";")
        stmts = []
        while self.peek().kind != "}":
            stmts.append(self.parse_stmt())
        self.expect("}")
        return name, tuple(params), ret, pre, post, tuple(stmts)


def _expand_power(base: Expr, exponent: int) -> Expr:
    if exponent == 0:
        return IntLit(1)
    out = base
    for _ in range(exponent - 1):
        out = Binary("*", out, base)
    return out


def parse_expression_text(source: str) -> Expr:
    """Parse a standalone expression; trailing input is an error."""
    parser = _Parser(tokenize(source))
    e = parser.parse_expr()
    tok = parser.peek()
    if tok.kind != "eof":
        parser.error(f"unexpected trailing input {tok.text!r}")
    return e


def parse_program_structure(source: str) -> Program:
    """Parse a program and split it around its unique top-level while loop.

    The returned Program has an empty type environment; `typecheck` fills it
    in.  Raises ProgramStructureError when the single-function/single-loop
    shape is violated.
    """
    parser = _Parser(tokenize(source))
    name, params, ret, pre, post, stmts = parser.parse_function()
    if parser.peek().kind != "eof":
        tok = parser.peek()
        if tok.kind == "kw" and tok.text == "fn":
            raise ProgramStructureError("multiple functions are not supported")
        parser.error(f"unexpected trailing input {tok.text!r}")

    loop_positions = [i for i, s in enumerate(stmts) if isinstance(s, While)]
    nested = [
        s for top in stmts for s in walk_stmt(top)
        if isinstance(s, While) and s is not top
    ]
    if nested:
        raise ProgramStructureError("nested while loops are not supported")
    if len(loop_positions) == 0:
        raise ProgramStructureError("no while loop present")
    if len(loop_positions) > 1:
        raise ProgramStructureError("multiple while loops are not supported")

    idx = loop_positions[0]
    loop = stmts[idx]
    assert isinstance(loop, While)
    return Program(
        name=name,
        params=params,
        ret=ret,
        pre=pre,
        post=post if post is not None else BoolLit(True),
        prelude=stmts[:idx],
        test=loop.test,
        annotation=loop.annotation,
        body=loop.body,
        epilogue=stmts[idx + 1:],
    )
