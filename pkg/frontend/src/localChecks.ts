/**
 * Client-side gate in front of the propose button: syntax, duplicates and
 * trace falsification are all rejected without any server round trip.
 */

import { Outcome, Row, rowOutcome } from "./evaluate.js";
import { Expr, ParseError, canonical, freeVariables, parseExpression } from "./parser.js";

export type RowColor = "green" | "red" | "neutral";

export interface Rejection {
  ok: false;
  reason: "syntax" | "unknown-variable" | "duplicate" | "falsified";
  detail: string;
}

export interface Accepted {
  ok: true;
  expr: Expr;
}

export type CheckResult = Accepted | Rejection;

export function tryParse(text: string, variables: Set<string>): Expr | null {
  if (!text.trim()) {
    return null;
  }
  let expr: Expr;
  try {
    expr = parseExpression(text);
  } catch (err) {
    if (err instanceof ParseError) {
      return null;
    }
    throw err;
  }
  for (const name of freeVariables(expr)) {
    if (!variables.has(name)) {
      return null;
    }
  }
  return expr;
}

/** Per-row colors for the trace table; neutral while the text is unparseable. */
export function rowColors(text: string, rows: Row[], variables: Set<string>): RowColor[] {
  const expr = tryParse(text, variables);
  if (expr === null) {
    return rows.map(() => "neutral");
  }
  return rows.map((row) => {
    const outcome: Outcome = rowOutcome(expr, row);
    return outcome === "green" ? "green" : "red";
  });
}

export function localChecks(
  text: string,
  history: string[],
  rows: Row[],
  variables: Set<string>,
): CheckResult {
  let expr: Expr;
  try {
    expr = parseExpression(text);
  } catch (err) {
    if (err instanceof ParseError) {
      return { ok: false, reason: "syntax", detail: err.message };
    }
    throw err;
  }
  for (const name of freeVariables(expr)) {
    if (!variables.has(name)) {
      return { ok: false, reason: "unknown-variable", detail: `unknown variable '${name}'` };
    }
  }
  const key = canonical(expr);
  for (const previous of history) {
    const prev = tryParse(previous, variables);
    if (prev !== null && canonical(prev) === key) {
      return { ok: false, reason: "duplicate", detail: "already proposed" };
    }
  }
  for (let i = 0; i < rows.length; i++) {
    if (rowOutcome(expr, rows[i]) !== "green") {
      return {
        ok: false,
        reason: "falsified",
        detail: `row ${i} does not satisfy the expression`,
      };
    }
  }
  return { ok: true, expr };
}
