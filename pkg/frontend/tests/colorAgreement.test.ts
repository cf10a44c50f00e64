/**
 * Client/server evaluation contract: every case in the shared fixture was
 * computed by the server's evaluator; the client must agree exactly.
 */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { Row, rowOutcome } from "../src/evaluate.js";
import { parseExpression } from "../src/parser.js";
import { valueFromWire } from "../src/rational.js";

interface Case {
  level: string;
  expr: string;
  row: Record<string, unknown>;
  expected: "green" | "red" | "error";
}

const fixturePath = fileURLToPath(new URL("../fixtures/color_cases.json", import.meta.url));
const cases: Case[] = JSON.parse(readFileSync(fixturePath, "utf-8"));

describe("color agreement with the server", () => {
  it("has a meaningful corpus", () => {
    expect(cases.length).toBeGreaterThanOrEqual(200);
    const outcomes = new Set(cases.map((c) => c.expected));
    expect(outcomes).toEqual(new Set(["green", "red", "error"]));
  });

  it("matches the server outcome on every case", () => {
    const mismatches: string[] = [];
    for (const c of cases) {
      const row: Row = {};
      for (const [name, raw] of Object.entries(c.row)) {
        row[name] = valueFromWire(raw);
      }
      const got = rowOutcome(parseExpression(c.expr), row);
      if (got !== c.expected) {
        mismatches.push(`${c.level}: '${c.expr}' on ${JSON.stringify(c.row)}: ${got} != ${c.expected}`);
      }
    }
    expect(mismatches).toEqual([]);
  });
});
