import { describe, expect, it } from "vitest";

import { EvalError, Rat, valueFromWire, valueToDisplay } from "../src/rational.js";

describe("Rat", () => {
  it("normalizes to lowest terms with positive denominator", () => {
    const r = new Rat(-4n, -6n);
    expect(r.num).toBe(2n);
    expect(r.den).toBe(3n);
    const s = new Rat(4n, -6n);
    expect(s.num).toBe(-2n);
    expect(s.den).toBe(3n);
  });

  it("adds and multiplies exactly beyond double precision", () => {
    const big = new Rat(10n ** 30n + 1n);
    const sum = big.add(new Rat(1n));
    expect(sum.toString()).toBe("1000000000000000000000000000002");
    const third = new Rat(1n, 3n);
    expect(third.add(third).add(third).equals(new Rat(1n))).toBe(true);
  });

  it("divides exactly and rejects zero", () => {
    expect(new Rat(1n).div(new Rat(3n)).toString()).toBe("1/3");
    expect(() => new Rat(1n).div(new Rat(0n))).toThrow(EvalError);
  });

  it("uses mathematical modulo in [0, m)", () => {
    expect(new Rat(-1n).mod(new Rat(2n)).toString()).toBe("1");
    expect(new Rat(13n).mod(new Rat(2n)).toString()).toBe("1");
    expect(() => new Rat(5n).mod(new Rat(0n))).toThrow(EvalError);
    expect(() => new Rat(5n).mod(new Rat(-2n))).toThrow(EvalError);
    expect(() => new Rat(1n, 2n).mod(new Rat(2n))).toThrow(EvalError);
  });

  it("compares across denominators", () => {
    expect(new Rat(1n, 3n).compare(new Rat(1n, 2n))).toBeLessThan(0);
    expect(new Rat(2n, 4n).equals(new Rat(1n, 2n))).toBe(true);
  });
});

describe("wire format", () => {
  it("round trips integers, rationals and booleans", () => {
    expect(valueFromWire("46")).toEqual(new Rat(46n));
    expect(valueFromWire("-3")).toEqual(new Rat(-3n));
    expect(valueFromWire("7/2")).toEqual(new Rat(7n, 2n));
    expect(valueFromWire(true)).toBe(true);
    expect(valueToDisplay(valueFromWire("-7/3"))).toBe("-7/3");
  });

  it("keeps exact rationals without rounding", () => {
    const v = valueFromWire("1/3");
    expect(valueToDisplay(v)).toBe("1/3");
  });
});
