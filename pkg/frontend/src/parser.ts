/**
 * Expression parser mirroring the server grammar, loosest to tightest:
 * `|`, `&`, comparisons (non-associative), `+ -`, `* / %`, `^`, unary `- !`.
 * `^` takes a non-negative integer literal and expands into repeated
 * multiplication, exactly as the server does.
 */

export type Expr =
  | { kind: "bool"; value: boolean }
  | { kind: "int"; value: bigint }
  | { kind: "var"; name: string }
  | { kind: "unary"; op: "-" | "!"; operand: Expr }
  | { kind: "binary"; op: BinaryOp; left: Expr; right: Expr };

export type BinaryOp =
  | "+" | "-" | "*" | "/" | "%"
  | "=" | "!=" | "<" | "<=" | ">" | ">="
  | "&" | "|";

export class ParseError extends Error {}

interface Token {
  kind: string;
  text: string;
}

const PUNCT = ["!=", "<=", ">=", "(", ")", "+", "-", "*", "/", "%", "^", "=", "<", ">", "&", "|", "!"];

function tokenize(source: string): Token[] {
  const tokens: Token[] = [];
  let i = 0;
  outer: while (i < source.length) {
    const ch = source[i];
    if (ch === " " || ch === "\t" || ch === "\n" || ch === "\r") {
      i += 1;
      continue;
    }
    if (/[0-9]/.test(ch)) {
      let j = i;
      while (j < source.length && /[0-9]/.test(source[j])) j += 1;
      tokens.push({ kind: "int", text: source.slice(i, j) });
      i = j;
      continue;
    }
    if (/[A-Za-z]/.test(ch)) {
      let j = i;
      while (j < source.length && /[A-Za-z0-9_]/.test(source[j])) j += 1;
      const word = source.slice(i, j);
      tokens.push({ kind: word === "true" || word === "false" ? "kw" : "ident", text: word });
      i = j;
      continue;
    }
    for (const p of PUNCT) {
      if (source.startsWith(p, i)) {
        tokens.push({ kind: p, text: p });
        i += p.length;
        continue outer;
      }
    }
    throw new ParseError(`unexpected character '${ch}'`);
  }
  tokens.push({ kind: "eof", text: "" });
  return tokens;
}

const COMPARISONS = new Set(["=", "!=", "<", "<=", ">", ">="]);

class Parser {
  private pos = 0;

  constructor(private tokens: Token[]) {}

  private peek(): Token {
    return this.tokens[this.pos];
  }

  private next(): Token {
    return this.tokens[this.pos++];
  }

  private expect(kind: string): Token {
    const tok = this.peek();
    if (tok.kind !== kind) {
      throw new ParseError(`expected '${kind}', found '${tok.text || "end of input"}'`);
    }
    return this.next();
  }

  parseExpr(): Expr {
    return this.parseOr();
  }

  finished(): boolean {
    return this.peek().kind === "eof";
  }

  private parseOr(): Expr {
    let e = this.parseAnd();
    while (this.peek().kind === "|") {
      this.next();
      e = { kind: "binary", op: "|", left: e, right: this.parseAnd() };
    }
    return e;
  }

  private parseAnd(): Expr {
    let e = this.parseCmp();
    while (this.peek().kind === "&") {
      this.next();
      e = { kind: "binary", op: "&", left: e, right: this.parseCmp() };
    }
    return e;
  }

  private parseCmp(): Expr {
    const e = this.parseAdd();
    if (COMPARISONS.has(this.peek().kind)) {
      const op = this.next().kind as BinaryOp;
      const right = this.parseAdd();
      if (COMPARISONS.has(this.peek().kind)) {
        throw new ParseError("comparisons are non-associative; parenthesize");
      }
      return { kind: "binary", op, left: e, right };
    }
    return e;
  }

  private parseAdd(): Expr {
    let e = this.parseMul();
    while (this.peek().kind === "+" || this.peek().kind === "-") {
      const op = this.next().kind as BinaryOp;
      e = { kind: "binary", op, left: e, right: this.parseMul() };
    }
    return e;
  }

  private parseMul(): Expr {
    let e = this.parsePow();
    while (["*", "/", "%"].includes(this.peek().kind)) {
      const op = this.next().kind as BinaryOp;
      e = { kind: "binary", op, left: e, right: this.parsePow() };
    }
    return e;
  }

  private parsePow(): Expr {
    const e = this.parseUnary();
    if (this.peek().kind === "^") {
      this.next();
      const exp = this.peek();
      if (exp.kind !== "int") {
        throw new ParseError("exponent must be a non-negative integer literal");
      }
      this.next();
      return expandPower(e, Number(exp.text));
    }
    return e;
  }

  private parseUnary(): Expr {
    const tok = this.peek();
    if (tok.kind === "-" || tok.kind === "!") {
      this.next();
      return { kind: "unary", op: tok.kind, operand: this.parseUnary() };
    }
    return this.parseAtom();
  }

  private parseAtom(): Expr {
    const tok = this.peek();
    if (tok.kind === "int") {
      this.next();
      return { kind: "int", value: BigInt(tok.text) };
    }
    if (tok.kind === "kw") {
      this.next();
      return { kind: "bool", value: tok.text === "true" };
    }
    if (tok.kind === "ident") {
      this.next();
      return { kind: "var", name: tok.text };
    }
    if (tok.kind === "(") {
      this.next();
      const e = this.parseExpr();
      this.expect(")");
      return e;
    }
    throw new ParseError(`expected expression, found '${tok.text || "end of input"}'`);
  }
}

function expandPower(base: Expr, exponent: number): Expr {
  if (exponent === 0) {
    return { kind: "int", value: 1n };
  }
  let out = base;
  for (let i = 1; i < exponent; i++) {
    out = { kind: "binary", op: "*", left: out, right: base };
  }
  return out;
}

export function parseExpression(source: string): Expr {
  const parser = new Parser(tokenize(source));
  const e = parser.parseExpr();
  if (!parser.finished()) {
    throw new ParseError("unexpected trailing input");
  }
  return e;
}

/** Canonical text used for duplicate detection (whitespace-insensitive). */
export function canonical(e: Expr): string {
  switch (e.kind) {
    case "bool":
      return e.value ? "true" : "false";
    case "int":
      return e.value.toString();
    case "var":
      return e.name;
    case "unary":
      return `(${e.op}${canonical(e.operand)})`;
    case "binary":
      return `(${canonical(e.left)}${e.op}${canonical(e.right)})`;
  }
}

export function freeVariables(e: Expr, into: Set<string> = new Set()): Set<string> {
  switch (e.kind) {
    case "var":
      into.add(e.name);
      break;
    case "unary":
      freeVariables(e.operand, into);
      break;
    case "binary":
      freeVariables(e.left, into);
      freeVariables(e.right, into);
      break;
  }
  return into;
}
