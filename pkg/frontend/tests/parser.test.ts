import { describe, expect, it } from "vitest";

import { evaluate } from "../src/evaluate.js";
import { ParseError, canonical, parseExpression } from "../src/parser.js";
import { Rat } from "../src/rational.js";

describe("parseExpression", () => {
  it("applies the game's precedence", () => {
    // & binds tighter than |, comparisons tighter than both
    const e = parseExpression("cnt = 0 | odd >= 1 & sqr >= odd");
    expect(e.kind).toBe("binary");
    if (e.kind === "binary") {
      expect(e.op).toBe("|");
      expect(e.right.kind === "binary" && e.right.op).toBe("&");
    }
  });

  it("expands ^ into repeated multiplication", () => {
    const a = parseExpression("(cnt+1)^2");
    const b = parseExpression("(cnt+1) * (cnt+1)");
    expect(canonical(a)).toBe(canonical(b));
  });

  it("rejects chained comparisons", () => {
    expect(() => parseExpression("0 <= x <= n")).toThrow(ParseError);
  });

  it("rejects non-literal exponents", () => {
    expect(() => parseExpression("x ^ y")).toThrow(ParseError);
  });

  it("rejects trailing input", () => {
    expect(() => parseExpression("x >= 1 )")).toThrow(ParseError);
  });

  it("canonical form ignores whitespace", () => {
    expect(canonical(parseExpression("odd    >=1"))).toBe(
      canonical(parseExpression("odd >= 1")),
    );
  });

  it("evaluates what it parses", () => {
    const e = parseExpression("2 * s = i * (i + 1)");
    const row = { s: new Rat(3n), i: new Rat(2n) };
    expect(evaluate(e, row)).toBe(true);
  });
});
