/**
 * Exact evaluation of parsed expressions over a trace row. Connectives are
 * strict - both operands always evaluate - so division and modulo errors
 * surface in the same rows where the server reports them.
 */

import { Expr } from "./parser.js";
import { EvalError, Rat, Value } from "./rational.js";

export type Row = Record<string, Value>;

function asRat(v: Value, what: string): Rat {
  if (typeof v === "boolean") {
    throw new EvalError(`${what} needs a numeric operand`);
  }
  return v;
}

function asBool(v: Value, what: string): boolean {
  if (typeof v !== "boolean") {
    throw new EvalError(`${what} needs a boolean operand`);
  }
  return v;
}

export function evaluate(e: Expr, row: Row): Value {
  switch (e.kind) {
    case "bool":
      return e.value;
    case "int":
      return new Rat(e.value);
    case "var": {
      const v = row[e.name];
      if (v === undefined) {
        throw new EvalError(`unknown variable '${e.name}'`);
      }
      return v;
    }
    case "unary": {
      const v = evaluate(e.operand, row);
      return e.op === "-" ? asRat(v, "'-'").neg() : !asBool(v, "'!'");
    }
    case "binary": {
      const l = evaluate(e.left, row);
      const r = evaluate(e.right, row);
      switch (e.op) {
        case "&":
          return asBool(l, "'&'") && asBool(r, "'&'");
        case "|":
          return asBool(l, "'|'") || asBool(r, "'|'");
        case "=":
        case "!=": {
          let same: boolean;
          if (typeof l === "boolean" || typeof r === "boolean") {
            if (typeof l !== typeof r) {
              throw new EvalError("cannot compare a boolean with a number");
            }
            same = l === r;
          } else {
            same = l.equals(r);
          }
          return e.op === "=" ? same : !same;
        }
        case "<":
          return asRat(l, "'<'").compare(asRat(r, "'<'")) < 0;
        case "<=":
          return asRat(l, "'<='").compare(asRat(r, "'<='")) <= 0;
        case ">":
          return asRat(l, "'>'").compare(asRat(r, "'>'")) > 0;
        case ">=":
          return asRat(l, "'>='").compare(asRat(r, "'>='")) >= 0;
        case "+":
          return asRat(l, "'+'").add(asRat(r, "'+'"));
        case "-":
          return asRat(l, "'-'").sub(asRat(r, "'-'"));
        case "*":
          return asRat(l, "'*'").mul(asRat(r, "'*'"));
        case "/":
          return asRat(l, "'/'").div(asRat(r, "'/'"));
        case "%":
          return asRat(l, "'%'").mod(asRat(r, "'%'"));
      }
    }
  }
}

export type Outcome = "green" | "red" | "error";

/** Boolean evaluation outcome for one row; errors are their own outcome. */
export function rowOutcome(e: Expr, row: Row): Outcome {
  try {
    const v = evaluate(e, row);
    if (typeof v !== "boolean") {
      return "error";
    }
    return v ? "green" : "red";
  } catch (err) {
    if (err instanceof EvalError) {
      return "error";
    }
    throw err;
  }
}
