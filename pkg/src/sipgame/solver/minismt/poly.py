"""Multivariate polynomials with exact rational coefficients.

A monomial is a sorted tuple of (variable, exponent) pairs; the empty tuple
is the constant monomial.  Polynomials are immutable-by-convention dicts
from monomial to nonzero Fraction.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Mapping

Monomial = tuple[tuple[str, int], ...]
Poly = dict[Monomial, Fraction]

CONST: Monomial = ()


def const(c) -> Poly:
    c = Fraction(c)
    return {CONST: c} if c else {}


def var(name: str) -> Poly:
    return {((name, 1),): Fraction(1)}


def add(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for m, c in q.items():
        nc = out.get(m, Fraction(0)) + c
        if nc:
            out[m] = nc
        else:
            out.pop(m, None)
    return out


def neg(p: Poly) -> Poly:
    return {m: -c for m, c in p.items()}


def sub(p: Poly, q: Poly) -> Poly:
    return add(p, neg(q))


def scale(p: Poly, k) -> Poly:
    k = Fraction(k)
    if not k:
        return {}
    return {m: c * k for m, c in p.items()}


def _mul_monoms(a: Monomial, b: Monomial) -> Monomial:
    exps: dict[str, int] = {}
    for v, e in a:
        exps[v] = exps.get(v, 0) + e
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for ma, ca in p.items():
        for mb, cb in q.items():
            m = _mul_monoms(ma, mb)
            nc = out.get(m, Fraction(0)) + ca * cb
            if nc:
                out[m] = nc
            else:
                out.pop(m, None)
    return out


def power(p: Poly, k: int) -> Poly:
    out = const(1)
    for _ in range(k):
        out = mul(out, p)
    return out


def degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def poly_degree(p: Poly) -> int:
    return max((degree(m) for m in p), default=0)


def poly_vars(p: Poly) -> set[str]:
    return {v for m in p for v, _ in m}


def is_linear(p: Poly) -> bool:
    return all(degree(m) <= 1 for m in p)


def constant_value(p: Poly):
    """The constant if p has no variables, else None."""
    if not p:
        return Fraction(0)
    if len(p) == 1 and CONST in p:
        return p[CONST]
    return None


def substitute(p: Poly, name: str, replacement: Poly) -> Poly:
    """Replace every occurrence of a variable by a polynomial."""
    out: Poly = {}
    for m, c in p.items():
        exp = 0
        rest: list[tuple[str, int]] = []
        for v, e in m:
            if v == name:
                exp = e
            else:
                rest.append((v, e))
        term: Poly = {tuple(rest): c}
        if exp:
            term = mul(term, power(replacement, exp))
        out = add(out, term)
    return out


def evaluate(p: Poly, model: Mapping[str, Fraction]) -> Fraction:
    total = Fraction(0)
    for m, c in p.items():
        v = c
        for name, e in m:
            v *= Fraction(model[name]) ** e
        total += v
    return total


def primitive_signed(p: Poly) -> tuple[tuple[Monomial, int], ...]:
    """Integer-scaled canonical form preserving sign."""
    if not p:
        return ()
    denom = lcm(*(c.denominator for c in p.values()))
    ints = {m: int(c * denom) for m, c in p.items()}
    g = gcd(*(abs(c) for c in ints.values()))
    return tuple(sorted((m, c // g) for m, c in ints.items()))


def primitive_form(p: Poly) -> tuple[tuple[Monomial, int], ...]:
    """Sign-normalized variant of primitive_signed: p and -p coincide."""
    items = primitive_signed(p)
    if items and items[0][1] < 0:
        items = tuple((m, -c) for m, c in items)
    return items


def from_linear(coeffs: Mapping[str, Fraction], constant: Fraction) -> Poly:
    out: Poly = {}
    for v, c in coeffs.items():
        if c:
            out[((v, 1),)] = Fraction(c)
    if constant:
        out[CONST] = Fraction(constant)
    return out


def to_linear(p: Poly) -> tuple[dict[str, Fraction], Fraction]:
    """Split a linear polynomial into (coefficients, constant)."""
    coeffs: dict[str, Fraction] = {}
    constant = Fraction(0)
    for m, c in p.items():
        if m == CONST:
            constant = c
        else:
            (v, e), = m
            assert e == 1, "polynomial is not linear"
            coeffs[v] = c
    return coeffs, constant
