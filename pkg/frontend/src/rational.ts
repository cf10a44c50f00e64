/**
 * Exact values for the game client: arbitrary-precision rationals on bigint,
 * matching the engine's arithmetic bit for bit (lowest terms, positive
 * denominator). A green row that the server would call red destroys trust,
 * so nothing here ever rounds.
 */

export class EvalError extends Error {}

function gcd(a: bigint, b: bigint): bigint {
  a = a < 0n ? -a : a;
  b = b < 0n ? -b : b;
  while (b) {
    [a, b] = [b, a % b];
  }
  return a;
}

export class Rat {
  readonly num: bigint;
  readonly den: bigint;

  constructor(num: bigint, den: bigint = 1n) {
    if (den === 0n) {
      throw new EvalError("division by zero");
    }
    if (den < 0n) {
      num = -num;
      den = -den;
    }
    const g = gcd(num, den);
    this.num = g > 1n ? num / g : num;
    this.den = g > 1n ? den / g : den;
  }

  static fromInt(n: bigint | number): Rat {
    return new Rat(typeof n === "number" ? BigInt(n) : n);
  }

  get isInteger(): boolean {
    return this.den === 1n;
  }

  add(other: Rat): Rat {
    return new Rat(this.num * other.den + other.num * this.den, this.den * other.den);
  }

  sub(other: Rat): Rat {
    return new Rat(this.num * other.den - other.num * this.den, this.den * other.den);
  }

  mul(other: Rat): Rat {
    return new Rat(this.num * other.num, this.den * other.den);
  }

  div(other: Rat): Rat {
    if (other.num === 0n) {
      throw new EvalError("division by zero");
    }
    return new Rat(this.num * other.den, this.den * other.num);
  }

  /** Mathematical modulo with the result in [0, m); integers only. */
  mod(other: Rat): Rat {
    if (!this.isInteger || !other.isInteger) {
      throw new EvalError("modulo needs integer operands");
    }
    if (other.num <= 0n) {
      throw new EvalError("modulo by a non-positive value");
    }
    const m = other.num;
    let r = this.num % m;
    if (r < 0n) {
      r += m;
    }
    return new Rat(r);
  }

  neg(): Rat {
    return new Rat(-this.num, this.den);
  }

  compare(other: Rat): number {
    const left = this.num * other.den;
    const right = other.num * this.den;
    return left < right ? -1 : left > right ? 1 : 0;
  }

  equals(other: Rat): boolean {
    return this.num === other.num && this.den === other.den;
  }

  toString(): string {
    return this.den === 1n ? this.num.toString() : `${this.num}/${this.den}`;
  }
}

export type Value = boolean | Rat;

/** Parse a wire value: true/false, "-12", "7/3". */
export function valueFromWire(raw: unknown): Value {
  if (typeof raw === "boolean") {
    return raw;
  }
  if (typeof raw === "string") {
    const text = raw.trim();
    if (text === "true" || text === "false") {
      return text === "true";
    }
    const slash = text.indexOf("/");
    if (slash >= 0) {
      return new Rat(BigInt(text.slice(0, slash)), BigInt(text.slice(slash + 1)));
    }
    return new Rat(BigInt(text));
  }
  if (typeof raw === "number" && Number.isInteger(raw)) {
    return new Rat(BigInt(raw));
  }
  throw new EvalError(`cannot parse wire value ${String(raw)}`);
}

export function valueToDisplay(value: Value): string {
  return typeof value === "boolean" ? (value ? "true" : "false") : value.toString();
}
