"""Linear integer/rational constraint solving.

Constraints have the form  sum(coeffs[v] * v) + const REL 0  with REL one of
'eq', 'le', 'lt'.  The pipeline is:

  1. normalization: clear denominators; over all-integer constraints turn
     strict bounds into '<=' and divide by the coefficient gcd, flooring the
     constant (sound integer tightening);
  2. equality elimination: divisibility (gcd) test, unit-coefficient
     substitution, and a Euclidean change of variables when no unit
     coefficient exists;
  3. Fourier-Motzkin elimination for the remainder, recording each
     variable's bounds so a model can be rebuilt by back-substitution.

'unsat' answers are proofs; 'sat' answers carry a model that the caller is
expected to verify against the original (possibly nonlinear) constraints.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd, lcm
from typing import Optional

MAX_CONSTRAINTS = 4000


class BudgetExceeded(Exception):
    pass


class ModelGap(Exception):
    """Rational solution space contains no integer point along this path."""


@dataclass
class LinCon:
    coeffs: dict[str, Fraction]
    const: Fraction
    rel: str  # 'eq' | 'le' | 'lt'

    def substitute(self, name: str, coeffs: dict[str, Fraction], const: Fraction) -> "LinCon":
        k = self.coeffs.get(name)
        if not k:
            return self
        new_coeffs = {v: c for v, c in self.coeffs.items() if v != name}
        for v, c in coeffs.items():
            nc = new_coeffs.get(v, Fraction(0)) + k * c
            if nc:
                new_coeffs[v] = nc
            else:
                new_coeffs.pop(v, None)
        return LinCon(new_coeffs, self.const + k * const, self.rel)

    def evaluate(self, model: dict[str, Fraction]) -> bool:
        total = self.const + sum(c * model[v] for v, c in self.coeffs.items())
        if self.rel == "eq":
            return total == 0
        if self.rel == "le":
            return total <= 0
        return total < 0


class LinearSolver:
    def __init__(self, constraints: list[LinCon], int_vars: set[str],
                 deadline: float):
        self.int_vars = set(int_vars)
        self.deadline = deadline
        self.subs: list[tuple[str, dict[str, Fraction], Fraction]] = []
        self.elim_stack: list[tuple[str, list[LinCon], list[LinCon]]] = []
        self.fresh_count = 0
        self.cons = [self._normalize(c) for c in constraints]

    # -- helpers -------------------------------------------------------------

    def _check_budget(self):
        if time.monotonic() > self.deadline:
            raise BudgetExceeded("deadline")
        if len(self.cons) > MAX_CONSTRAINTS:
            raise BudgetExceeded("too many constraints")

    def _normalize(self, con: LinCon) -> LinCon:
        coeffs = {v: c for v, c in con.coeffs.items() if c}
        const = con.const
        rel = con.rel
        if not coeffs:
            return LinCon({}, const, rel)
        denoms = [c.denominator for c in coeffs.values()] + [const.denominator]
        m = lcm(*denoms)
        if m != 1:
            coeffs = {v: c * m for v, c in coeffs.items()}
            const = const * m
        if all(v in self.int_vars for v in coeffs):
            if rel == "lt":
                # over integers a.x + c < 0  <=>  a.x + c + 1 <= 0
                const += 1
                rel = "le"
            g = gcd(*(abs(int(c)) for c in coeffs.values()))
            if g > 1:
                coeffs = {v: Fraction(int(c) // g) for v, c in coeffs.items()}
                if rel == "eq":
                    const = const / g
                else:
                    # a.x <= -c  ->  (a/g).x <= floor(-c/g)
                    const = Fraction(-floor(Fraction(-const, g)))
        return LinCon(coeffs, const, rel)

    # -- equality elimination --------------------------------------------------

    def _apply_substitution(self, name: str, coeffs: dict[str, Fraction], const: Fraction):
        self.subs.append((name, dict(coeffs), const))
        self.cons = [
            self._normalize(c.substitute(name, coeffs, const)) for c in self.cons
        ]

    def _eliminate_equalities(self) -> Optional[str]:
        """Returns 'unsat' on divisibility failure, else None."""
        for _ in range(200):
            self._check_budget()
            eq = next((c for c in self.cons if c.rel == "eq" and c.coeffs), None)
            if eq is None:
                return None
            self.cons.remove(eq)
            # prefer solving for a rational variable: no integrality to preserve
            real_var = next((v for v in sorted(eq.coeffs) if v not in self.int_vars), None)
            if real_var is not None:
                a = eq.coeffs[real_var]
                coeffs = {v: -c / a for v, c in eq.coeffs.items() if v != real_var}
                self._apply_substitution(real_var, coeffs, -eq.const / a)
                continue
            # all-integer equality
            ints = {v: int(c) for v, c in eq.coeffs.items()}
            g = gcd(*(abs(c) for c in ints.values()))
            if eq.const.denominator != 1 or int(eq.const) % g != 0:
                return "unsat"
            ints = {v: c // g for v, c in ints.items()}
            c0 = int(eq.const) // g
            unit = next((v for v in sorted(ints) if abs(ints[v]) == 1), None)
            if unit is not None:
                a = ints[unit]
                coeffs = {v: Fraction(-c, a) for v, c in ints.items() if v != unit}
                self._apply_substitution(unit, coeffs, Fraction(-c0, a))
                continue
            # Euclidean step: rewrite through a fresh variable to shrink the
            # minimum coefficient until a unit appears
            k = min(sorted(ints), key=lambda v: abs(ints[v]))
            ak = ints[k]
            self.fresh_count += 1
            t = f"_t{self.fresh_count}"
            self.int_vars.add(t)
            # t = x_k + sum_{i != k} (a_i div a_k) x_i
            t_coeffs = {v: Fraction(ints[v] // ak) for v in ints if v != k}
            # x_k = t - sum t_coeffs
            xk_coeffs = {v: -c for v, c in t_coeffs.items()}
            xk_coeffs[t] = Fraction(1)
            self._apply_substitution(k, xk_coeffs, Fraction(0))
            # the equality itself, rewritten: a_k t + sum (a_i mod a_k) x_i + c0 = 0
            new_coeffs = {t: Fraction(ak)}
            for v in ints:
                if v == k:
                    continue
                r = ints[v] - (ints[v] // ak) * ak
                if r:
                    new_coeffs[v] = Fraction(r)
            self.cons.append(self._normalize(LinCon(new_coeffs, Fraction(c0), "eq")))
        raise BudgetExceeded("equality elimination did not converge")

    # -- Fourier-Motzkin ---------------------------------------------------------

    def _eliminate_var(self, name: str):
        lowers, uppers, rest = [], [], []
        for c in self.cons:
            a = c.coeffs.get(name)
            if not a:
                rest.append(c)
            elif a < 0:
                lowers.append(c)
            else:
                uppers.append(c)
        self.elim_stack.append((name, lowers, uppers))
        for lo in lowers:
            for up in uppers:
                self._check_budget()
                al, au = lo.coeffs[name], up.coeffs[name]
                coeffs: dict[str, Fraction] = {}
                for v, c in lo.coeffs.items():
                    if v != name:
                        coeffs[v] = c * au
                for v, c in up.coeffs.items():
                    if v == name:
                        continue
                    nc = coeffs.get(v, Fraction(0)) + c * (-al)
                    if nc:
                        coeffs[v] = nc
                    else:
                        coeffs.pop(v, None)
                const = lo.const * au + up.const * (-al)
                rel = "lt" if "lt" in (lo.rel, up.rel) else "le"
                rest.append(self._normalize(LinCon(coeffs, const, rel)))
        self.cons = rest

    def _constant_check(self) -> Optional[str]:
        remaining = []
        for c in self.cons:
            if c.coeffs:
                remaining.append(c)
                continue
            if c.rel == "eq" and c.const != 0:
                return "unsat"
            if c.rel == "le" and c.const > 0:
                return "unsat"
            if c.rel == "lt" and c.const >= 0:
                return "unsat"
        self.cons = remaining
        return None

    # -- model construction -------------------------------------------------------

    def _pick_value(self, name: str, lowers: list[LinCon], uppers: list[LinCon],
                    model: dict[str, Fraction]) -> Fraction:
        lo: Optional[Fraction] = None
        lo_strict = False
        for c in lowers:
            a = c.coeffs[name]
            rest = c.const + sum(k * model[v] for v, k in c.coeffs.items() if v != name)
            bound = rest / (-a)  # a < 0:  v >= rest / -a
            if lo is None or bound > lo or (bound == lo and c.rel == "lt"):
                lo, lo_strict = bound, c.rel == "lt"
        hi: Optional[Fraction] = None
        hi_strict = False
        for c in uppers:
            a = c.coeffs[name]
            rest = c.const + sum(k * model[v] for v, k in c.coeffs.items() if v != name)
            bound = -rest / a
            if hi is None or bound < hi or (bound == hi and c.rel == "lt"):
                hi, hi_strict = bound, c.rel == "lt"

        if name in self.int_vars:
            lo_int = None if lo is None else (floor(lo) + 1 if lo_strict or lo.denominator != 1 else int(lo))
            hi_int = None if hi is None else (ceil(hi) - 1 if hi_strict or hi.denominator != 1 else int(hi))
            if lo_int is not None and hi_int is not None and lo_int > hi_int:
                raise ModelGap(name)
            pick = 0
            if lo_int is not None:
                pick = max(pick, lo_int)
            if hi_int is not None:
                pick = min(pick, hi_int)
            return Fraction(pick)

        if lo is not None and hi is not None:
            if lo > hi or (lo == hi and (lo_strict or hi_strict)):
                raise ModelGap(name)
            if lo == hi:
                return lo
            mid = (lo + hi) / 2
            return mid
        if lo is not None:
            return lo if not lo_strict else lo + 1
        if hi is not None:
            return hi if not hi_strict else hi - 1
        return Fraction(0)

    # -- entry point --------------------------------------------------------------

    def solve(self) -> tuple[str, Optional[dict[str, Fraction]]]:
        """Returns ('unsat', None), ('sat', model) or raises BudgetExceeded /
        ModelGap when a model cannot be completed along the chosen path."""
        if self._constant_check() == "unsat":
            return "unsat", None
        if self._eliminate_equalities() == "unsat":
            return "unsat", None
        if self._constant_check() == "unsat":
            return "unsat", None

        while True:
            names = sorted({v for c in self.cons for v in c.coeffs})
            if not names:
                break
            # cheapest variable first keeps the constraint blowup down
            def cost(v: str) -> tuple[int, str]:
                lows = sum(1 for c in self.cons if c.coeffs.get(v, 0) < 0)
                ups = sum(1 for c in self.cons if c.coeffs.get(v, 0) > 0)
                return (lows * ups - lows - ups, v)

            self._eliminate_var(min(names, key=cost))
            if self._constant_check() == "unsat":
                return "unsat", None

        model: dict[str, Fraction] = {}
        # a variable whose every remaining constraint was absorbed as a bound
        # of an earlier-eliminated variable never got eliminated itself; any
        # value works for it, so default first
        stack_names = {name for name, _, _ in self.elim_stack}
        sub_names = {name for name, _, _ in self.subs}
        referenced: set[str] = set()
        for _, lowers, uppers in self.elim_stack:
            for c in lowers + uppers:
                referenced.update(c.coeffs)
        for _, coeffs, _ in self.subs:
            referenced.update(coeffs)
        for v in sorted(referenced - stack_names - sub_names):
            model[v] = Fraction(0)
        for name, lowers, uppers in reversed(self.elim_stack):
            model[name] = self._pick_value(name, lowers, uppers, model)
        for name, coeffs, const in reversed(self.subs):
            value = const + sum(c * model[v] for v, c in coeffs.items())
            if name in self.int_vars and value.denominator != 1:
                raise ModelGap(name)
            model[name] = value
        return "sat", model
